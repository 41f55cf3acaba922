#include "kflow/io.hpp"

#include "kflow/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace kflow::io {

VnAlgebra algebra_from_json(const json& j) {
    if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array())
        throw SchemaError("algebra: expected {\"blocks\": [...]}");
    std::vector<Block> blocks;
    for (const auto& b : j["blocks"]) {
        if (!b.is_object() || !b.contains("dim") || !b["dim"].is_number_integer())
            throw SchemaError("algebra: every block needs an integer \"dim\"");
        Block blk;
        blk.dim = b["dim"].get<int>();
        blk.weight = b.value("weight", 1.0);
        blk.in_ideal = b.value("ideal", false);
        blocks.push_back(blk);
    }
    try {
        return VnAlgebra(std::move(blocks));
    } catch (const ModelError& e) {
        throw SchemaError(std::string("algebra: ") + e.what());
    }
}

json algebra_to_json(const VnAlgebra& alg) {
    json blocks = json::array();
    for (const auto& b : alg.blocks()) blocks.push_back({{"dim", b.dim}, {"weight", b.weight}, {"ideal", b.in_ideal}});
    return {{"blocks", blocks}};
}

BlockOperator operator_from_json(const json& j, const VnAlgebra& alg) {
    if (!j.is_array() || j.size() != alg.size())
        throw SchemaError("operator: expected one matrix per block (" + std::to_string(alg.size()) + ")");
    std::vector<Mat> bs;
    for (std::size_t i = 0; i < alg.size(); ++i) {
        const auto& rows = j[i];
        const int n = alg[i].dim;
        if (!rows.is_array() || static_cast<int>(rows.size()) != n)
            throw SchemaError("operator: block " + std::to_string(i) + " must have " + std::to_string(n) + " rows");
        Mat m(n, n);
        for (int r = 0; r < n; ++r) {
            const auto& row = rows[static_cast<std::size_t>(r)];
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                throw SchemaError("operator: block " + std::to_string(i) + " is not square");
            for (int c = 0; c < n; ++c) {
                const auto& z = row[static_cast<std::size_t>(c)];
                if (z.is_number()) {
                    m(r, c) = cplx(z.get<double>(), 0.0);
                } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
                    m(r, c) = cplx(z[0].get<double>(), z[1].get<double>());
                } else {
                    throw SchemaError("operator: entries must be [re, im] pairs");
                }
            }
        }
        bs.push_back(std::move(m));
    }
    return BlockOperator(std::move(bs));
}

json operator_to_json(const BlockOperator& op) {
    json out = json::array();
    for (const auto& m : op.blocks()) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
            rows.push_back(std::move(row));
        }
        out.push_back(std::move(rows));
    }
    return out;
}

json k0_to_json(const K0Class& c) {
    json out = json::array();
    for (long r : c.ranks()) out.push_back(r);
    return out;
}

std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    if (x == 0.0) x = 0.0;  // drop the sign of -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    // Keep floats recognizable as floats.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

namespace {

void emit(std::ostream& os, const json& j, int indent, int level) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
    const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{' << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
                emit(os, it.value(), indent, level + 1);
            }
            os << nl << close << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            // Arrays of scalars (or of scalar pairs) stay on one line.
            bool flat = true;
            for (const auto& v : j) {
                if (v.is_object()) flat = false;
                if (v.is_array())
                    for (const auto& w : v)
                        if (w.is_structured()) flat = false;
            }
            if (flat || indent == 0) {
                os << '[';
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) os << (indent > 0 ? ", " : ",");
                    emit(os, j[i], 0, 0);
                }
                os << ']';
                return;
            }
            os << '[' << nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ',' << nl;
                os << pad;
                emit(os, j[i], indent, level + 1);
            }
            os << nl << close << ']';
            return;
        }
        case json::value_t::number_float:
            os << format_double(j.get<double>());
            return;
        default:
            os << j.dump();
            return;
    }
}

}  // namespace

void write(std::ostream& os, const json& j, int indent) { emit(os, j, indent, 0); }

std::string dump(const json& j, int indent) {
    std::ostringstream os;
    write(os, j, indent);
    return os.str();
}

}  // namespace kflow::io
