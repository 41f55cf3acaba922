#include "kflow/cli.hpp"

#include "kflow/corner_index.hpp"
#include "kflow/errors.hpp"
#include "kflow/kk_pairing.hpp"
#include "kflow/models.hpp"
#include "kflow/spec_flow.hpp"
#include "kflow/spectral_triple.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace kflow::cli {

using io::json;
using io::SchemaError;

namespace {

constexpr int kTrackSamples = 200;

struct Context {
    VnAlgebra alg;
    std::map<std::string, BlockOperator> operators;
    Tolerances tol;
    const json& doc;

    BlockOperator resolve(const json& ref) const {
        if (ref.is_string()) {
            const auto name = ref.get<std::string>();
            auto it = operators.find(name);
            if (it == operators.end()) throw SchemaError("unknown operator '" + name + "'");
            return it->second;
        }
        return io::operator_from_json(ref, alg);
    }

    const json& field(const char* key) const {
        if (!doc.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"");
        return doc[key];
    }
};

Tolerances parse_tolerances(const json& doc, const Overrides& ov) {
    Tolerances tol;
    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        if (!t.is_object()) throw SchemaError("\"tolerances\" must be an object");
        tol.proj_rel = t.value("proj", tol.proj_rel);
        tol.kernel_rel = t.value("kernel", tol.kernel_rel);
        tol.zero_rel = t.value("zero", tol.zero_rel);
        tol.intersection = t.value("intersection", tol.intersection);
        tol.gap = t.value("gap", tol.gap);
        tol.partition_margin = t.value("partition_margin", tol.partition_margin);
        tol.max_depth = t.value("max_depth", tol.max_depth);
    }
    if (ov.tol_kernel) tol.kernel_rel = *ov.tol_kernel;
    if (ov.tol_gap) tol.gap = *ov.tol_gap;
    if (ov.max_depth) tol.max_depth = *ov.max_depth;
    return tol;
}

OperatorPath parse_path(const Context& ctx) {
    const auto& p = ctx.field("path");
    if (!p.is_object() || !p.contains("keyframes") || !p["keyframes"].is_array())
        throw SchemaError("\"path\" must be {\"keyframes\": [...]}");
    std::vector<OperatorPath::Keyframe> ks;
    for (const auto& k : p["keyframes"]) {
        if (!k.is_object() || !k.contains("t") || !k["t"].is_number() || !k.contains("op"))
            throw SchemaError("keyframe must be {\"t\": number, \"op\": operator}");
        ks.push_back({k["t"].get<double>(), ctx.resolve(k["op"])});
    }
    try {
        OperatorPath path(std::move(ks));
        path.check_conforms(ctx.alg);
        return path;
    } catch (const ModelError& e) {
        throw SchemaError(std::string("path: ") + e.what());
    }
}

VnTriple parse_triple(const Context& ctx) {
    const auto& g = ctx.field("generators");
    std::vector<VnTriple::Generator> gens;
    if (g.is_object()) {
        for (auto it = g.begin(); it != g.end(); ++it) gens.emplace_back(it.key(), ctx.resolve(it.value()));
    } else if (g.is_array()) {
        for (const auto& name : g) {
            if (!name.is_string()) throw SchemaError("\"generators\" array must list operator names");
            gens.emplace_back(name.get<std::string>(), ctx.resolve(name));
        }
    } else {
        throw SchemaError("\"generators\" must be an object or an array of names");
    }
    return VnTriple(ctx.alg, std::move(gens), ctx.resolve(ctx.field("D")), ctx.tol);
}

BlockOperator unitary_of(const Context& ctx, const VnTriple* triple) {
    const auto& ref = ctx.field("unitary");
    if (triple != nullptr && ref.is_string()) {
        for (const auto& [name, a] : triple->generators())
            if (name == ref.get<std::string>()) return a;
    }
    return ctx.resolve(ref);
}

json base_report(const std::string& task) {
    json r;
    r["task"] = task;
    r["k0_class"] = json::array();
    r["tau"] = std::numeric_limits<double>::quiet_NaN();
    r["partition"] = json::array();
    r["diagnostics"] = {{"min_quotient_gap", std::numeric_limits<double>::quiet_NaN()}, {"residuals", json::object()}};
    r["version"] = kVersion;
    return r;
}

void set_class(json& r, const K0Class& c, const VnAlgebra& alg) {
    r["k0_class"] = io::k0_to_json(c);
    r["tau"] = tau_star(c, alg);
}

std::string tracks_csv(const OperatorPath& path, const std::function<BlockOperator(const BlockOperator&)>& view) {
    std::ostringstream os;
    os << "t,block,index,eigenvalue\n";
    for (int s = 0; s <= kTrackSamples; ++s) {
        const double t = (s == kTrackSamples) ? 1.0 : static_cast<double>(s) / kTrackSamples;
        const BlockOperator b = view(path.at(t));
        for (std::size_t i = 0; i < b.size(); ++i) {
            const auto e = la::eigh(b.block(i));
            for (Eigen::Index k = 0; k < e.values.size(); ++k)
                os << io::format_double(t) << ',' << i << ',' << k << ',' << io::format_double(e.values(k)) << '\n';
        }
    }
    return os.str();
}

json run_generate(const json& gen, const Overrides& ov, const json& doc) {
    if (!gen.is_object() || !gen.contains("model")) throw SchemaError("\"generate\" must name a \"model\"");
    const auto model = gen["model"].get<std::string>();
    if (model == "dirac") return generate_dirac(gen.value("m", 8), gen.value("k", 1));
    if (model == "crossing") {
        std::uint64_t seed = gen.value("seed", doc.value("seed", std::uint64_t{0}));
        if (ov.seed) seed = *ov.seed;
        return generate_crossing(gen.value("n", 2), gen.value("crossings", std::vector<int>{}), seed,
                                 gen.value("weight", 1.0));
    }
    if (model == "weighted") {
        return generate_weighted(gen.value("dims", std::vector<int>{}), gen.value("weights", std::vector<double>{}),
                                 gen.value("ideal", std::vector<bool>{}));
    }
    throw SchemaError("unknown generator model '" + model + "'");
}

}  // namespace

TaskResult run_task(const json& doc, const Overrides& ov, bool want_tracks) {
    if (!doc.is_object()) throw SchemaError("task document must be a JSON object");
    if (!doc.contains("task") || !doc["task"].is_string()) throw SchemaError("missing string field \"task\"");
    const auto task = doc["task"].get<std::string>();
    TaskResult out;

    if (task == "generate") {
        if (!doc.contains("generate")) throw SchemaError("missing field \"generate\"");
        out.report = run_generate(doc["generate"], ov, doc);
        return out;
    }

    Context ctx{io::algebra_from_json(doc.contains("algebra") ? doc["algebra"] : json()), {}, parse_tolerances(doc, ov),
                doc};
    if (doc.contains("operators")) {
        const auto& ops = doc["operators"];
        if (!ops.is_object()) throw SchemaError("\"operators\" must be an object");
        for (auto it = ops.begin(); it != ops.end(); ++it)
            ctx.operators.emplace(it.key(), io::operator_from_json(it.value(), ctx.alg));
    }
    const auto& alg = ctx.alg;
    json r = base_report(task);
    // Built separately: references into an ordered_json do not survive insertion.
    json diag = json::object();
    json residuals = json::object();
    diag["min_quotient_gap"] = std::numeric_limits<double>::quiet_NaN();

    if (task == "spectral_flow") {
        const OperatorPath path = parse_path(ctx);
        const auto cert = certify_path(path, alg, ctx.tol);
        const auto tr = spectral_flow_on_partition(path, alg, find_partition(path, alg, ctx.tol), ctx.tol);
        set_class(r, tr.value, alg);
        r["partition"] = tr.partition;
        diag["min_quotient_gap"] = cert.min_gap;
        diag["max_quotient_lipschitz"] = cert.max_lipschitz;
        json steps = json::array();
        for (std::size_t i = 0; i < tr.partition.size(); ++i) {
            json s = {{"t", tr.partition[i]}, {"gap", tr.gaps[i]}};
            s["contribution"] = i == 0 ? json::array() : io::k0_to_json(tr.contributions[i - 1]);
            steps.push_back(std::move(s));
        }
        diag["steps"] = std::move(steps);
        diag["closed_form"] = io::k0_to_json(tr.closed_form);
        if (want_tracks) out.tracks_csv = tracks_csv(path, [](const BlockOperator& b) { return b; });
    } else if (task == "sf_unitary") {
        const VnTriple triple = parse_triple(ctx);
        const auto rep = sf_unitary_report(triple, unitary_of(ctx, &triple), ctx.tol);
        set_class(r, rep.value, alg);
        residuals["commutator_u_p"] = rep.commutator;
        diag["via_p_f"] = io::k0_to_json(rep.via_p_f);
        diag["via_index"] = io::k0_to_json(rep.via_index);
    } else if (task == "sf_unbounded") {
        const VnTriple triple = parse_triple(ctx);
        const OperatorPath path = parse_path(ctx);
        const auto rep = sf_unbounded_report(triple, path, ctx.tol);
        set_class(r, rep.value, alg);
        r["partition"] = json::array({0.0, 1.0});
        residuals["max_quotient_drift"] = rep.max_quotient_drift;
        if (want_tracks) {
            const BlockOperator d = triple.dirac();
            out.tracks_csv = tracks_csv(path, [&](const BlockOperator& a) { return bounded_transform(d + a, ctx.tol); });
        }
    } else if (task == "index") {
        const BlockOperator s = ctx.resolve(ctx.field("S"));
        const BlockOperator p = ctx.resolve(ctx.field("p"));
        const BlockOperator q = ctx.resolve(ctx.field("q"));
        const auto fr = is_corner_fredholm(s, p, q, alg, ctx.tol);
        diag["min_quotient_gap"] = fr.min_gap;
        set_class(r, corner_index(s, p, q, alg, ctx.tol), alg);
    } else if (task == "boundary") {
        const BlockOperator s = ctx.resolve(ctx.field("S"));
        const BlockOperator one = BlockOperator::identity(alg);
        residuals["quotient_unitarity_left"] = quotient_norm(s.adjoint() * s - one, alg);
        residuals["quotient_unitarity_right"] = quotient_norm(s * s.adjoint() - one, alg);
        set_class(r, boundary_map(s, alg, ctx.tol), alg);
    } else if (task == "pairing") {
        BlockMap psi = BlockMap::identity();
        if (doc.contains("psi")) {
            const auto& ps = doc["psi"];
            if (!ps.is_object() || !ps.contains("conjugation"))
                throw SchemaError("\"psi\" must be {\"conjugation\": operator}");
            psi = BlockMap::conjugation(ctx.resolve(ps["conjugation"]));
        }
        const auto data = make_pairing_data(alg, ctx.resolve(ctx.field("p")), unitary_of(ctx, nullptr), psi, ctx.tol);
        const auto rep = pairing_report(data, ctx.tol);
        set_class(r, rep.value, alg);
        residuals["commutator_p_psi_u"] = rep.commutator;
        residuals["intermediate_unitarity"] = rep.w_residual;
        residuals["cos_identity"] = rep.cos_residual;
        diag["p_snapped"] = rep.snapped;
    } else if (task == "checks") {
        const VnTriple triple = parse_triple(ctx);
        const auto km = check_kasparov_module(triple, ctx.tol);
        json entries = json::array();
        for (const auto& e : km.entries)
            entries.push_back({{"generator", e.name},
                               {"commutator", e.commutator},
                               {"resolvent_defect", e.resolvent_defect},
                               {"selfadjoint_defect", e.selfadjoint_defect}});
        diag["kasparov"] = {{"passed", km.passed}, {"entries", entries}, {"failures", km.failures}};
        json integrals = json::array();
        for (const auto& [na, a] : triple.generators()) {
            for (const auto& [nb, b] : triple.generators()) {
                const auto ir = resolvent_integral_check(triple, a, b, ctx.tol);
                integrals.push_back({{"a", na},
                                     {"b", nb},
                                     {"residual", ir.residual},
                                     {"relative_residual", ir.relative_residual},
                                     {"tail_bound", ir.tail_bound}});
                residuals["resolvent_integral[" + na + "," + nb + "]"] = ir.residual;
            }
        }
        diag["resolvent_integral"] = std::move(integrals);
    } else {
        throw SchemaError("unknown task '" + task + "'");
    }
    json d = {{"min_quotient_gap", diag["min_quotient_gap"]}, {"residuals", std::move(residuals)}};
    for (auto it = diag.begin(); it != diag.end(); ++it)
        if (it.key() != "min_quotient_gap") d[it.key()] = it.value();
    r["diagnostics"] = std::move(d);
    out.report = std::move(r);
    return out;
}

// ---- generators -------------------------------------------------------------------

io::json generate_dirac(int m, int k) {
    const auto model = models::dirac_circle(m, k);
    const auto& t = model.triple;
    json doc;
    doc["task"] = "sf_unitary";
    doc["algebra"] = io::algebra_to_json(t.algebra());
    json ops = json::object();
    json gens = json::object();
    for (const auto& [name, a] : t.generators()) {
        ops[name] = io::operator_to_json(a);
        gens[name] = name;
    }
    ops["D"] = io::operator_to_json(t.dirac());
    doc["operators"] = std::move(ops);
    doc["generators"] = std::move(gens);
    doc["D"] = "D";
    doc["unitary"] = "u";
    doc["model"] = {{"name", "dirac_circle"}, {"m", m}, {"k", k}};
    return doc;
}

io::json generate_crossing(int n, const std::vector<int>& crossings, std::uint64_t seed, double weight) {
    const OperatorPath path = models::random_crossing_path(n, crossings, seed);
    json doc;
    doc["task"] = "spectral_flow";
    doc["algebra"] = io::algebra_to_json(models::weighted_model({n}, {weight}, {true}));
    json ops = json::object();
    json keys = json::array();
    std::size_t idx = 0;
    for (const auto& k : path.keyframes()) {
        const std::string name = "B" + std::to_string(idx++);
        ops[name] = io::operator_to_json(k.op);
        keys.push_back({{"t", k.t}, {"op", name}});
    }
    doc["operators"] = std::move(ops);
    doc["path"] = {{"keyframes", std::move(keys)}};
    doc["seed"] = seed;
    doc["model"] = {{"name", "random_crossing_path"}, {"n", n}, {"crossings", crossings}};
    return doc;
}

io::json generate_weighted(const std::vector<int>& dims, const std::vector<double>& weights,
                           const std::vector<bool>& ideal) {
    return {{"algebra", io::algebra_to_json(models::weighted_model(dims, weights, ideal))}};
}

// ---- command line ------------------------------------------------------------------

namespace {

std::vector<int> parse_signs(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "+" || tok == "+1" || tok == "1") out.push_back(1);
        else if (tok == "-" || tok == "-1") out.push_back(-1);
        else if (!tok.empty()) throw SchemaError("crossings must be a comma list of + and -");
    }
    return out;
}

int emit(const json& j, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        io::write(out, j);
        out << '\n';
        return kExitOk;
    }
    std::ofstream f(path);
    if (!f) throw SchemaError("cannot open output file " + path);
    io::write(f, j);
    f << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"K-theoretic spectral flow on finite von Neumann models", "kflow"};
    app.require_subcommand(1);

    std::string task_file, out_path, tracks_path;
    Overrides ov;
    double tol_kernel = 0.0, tol_gap = 0.0;
    int max_depth = 0;
    std::uint64_t seed = 0;

    auto* run_cmd = app.add_subcommand("run", "Run a task file and write the JSON report");
    run_cmd->add_option("task", task_file, "Task JSON file")->required();
    run_cmd->add_option("--out", out_path, "Report path (default: stdout)");
    run_cmd->add_option("--tracks", tracks_path, "CSV eigenvalue tracks for path tasks");
    auto* o_kernel = run_cmd->add_option("--tol-kernel", tol_kernel, "Relative kernel threshold");
    auto* o_gap = run_cmd->add_option("--tol-gap", tol_gap, "Quotient gap threshold");
    auto* o_depth = run_cmd->add_option("--max-depth", max_depth, "Partition bisection depth");
    auto* o_seed = run_cmd->add_option("--seed", seed, "Seed for generator tasks");

    auto* gen = app.add_subcommand("generate", "Emit a model as a runnable task document");
    gen->require_subcommand(1);
    gen->add_option("--out", out_path, "Output path (default: stdout)");
    int m = 8, k = 1, n = 2;
    std::string crossings;
    double weight = 1.0;
    std::vector<int> dims;
    std::vector<double> weights;
    std::vector<int> ideal;
    auto* g_dirac = gen->add_subcommand("dirac", "Truncated circle Dirac triple with a winding unitary");
    g_dirac->add_option("--m", m, "Window radius");
    g_dirac->add_option("--k", k, "Winding");
    auto* g_cross = gen->add_subcommand("crossing", "Random path with prescribed eigenvalue crossings");
    g_cross->add_option("--n", n, "Dimension");
    g_cross->add_option("--crossings", crossings, "Comma list of + (upward) and - (downward)");
    g_cross->add_option("--seed", seed, "Seed");
    g_cross->add_option("--weight", weight, "Trace weight of the block");
    auto* g_weighted = gen->add_subcommand("weighted", "Algebra with the given blocks");
    g_weighted->add_option("--dims", dims, "Block dimensions")->delimiter(',')->required();
    g_weighted->add_option("--weights", weights, "Trace weights")->delimiter(',')->required();
    g_weighted->add_option("--ideal", ideal, "Ideal mask as 0/1")->delimiter(',')->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitSchema;
    }

    try {
        if (*run_cmd) {
            if (*o_kernel) ov.tol_kernel = tol_kernel;
            if (*o_gap) ov.tol_gap = tol_gap;
            if (*o_depth) ov.max_depth = max_depth;
            if (*o_seed) ov.seed = seed;
            std::ifstream f(task_file);
            if (!f) throw SchemaError("cannot read task file " + task_file);
            json doc;
            try {
                doc = json::parse(f);
            } catch (const json::parse_error& e) {
                throw SchemaError(std::string("invalid JSON: ") + e.what());
            }
            const auto res = run_task(doc, ov, !tracks_path.empty());
            if (!tracks_path.empty()) {
                std::ofstream t(tracks_path);
                if (!t) throw SchemaError("cannot open tracks file " + tracks_path);
                t << (res.tracks_csv.empty() ? std::string("t,block,index,eigenvalue\n") : res.tracks_csv);
            }
            return emit(res.report, out_path, out);
        }
        json doc;
        if (*g_dirac) doc = generate_dirac(m, k);
        else if (*g_cross) doc = generate_crossing(n, parse_signs(crossings), seed, weight);
        else {
            std::vector<bool> mask(ideal.begin(), ideal.end());
            doc = generate_weighted(dims, weights, mask);
        }
        return emit(doc, out_path, out);
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const ModelError& e) {
        err << "schema error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const json::exception& e) {
        err << "schema error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const PreconditionError& e) {
        err << e.what() << '\n';
        return kExitPrecondition;
    } catch (const NumericalError& e) {
        err << e.what() << '\n';
        return kExitPrecondition;
    } catch (const ConsistencyError& e) {
        err << e.what() << '\n';
        return kExitConsistency;
    }
}

}  // namespace kflow::cli
