#pragma once

#include "kflow/vn_model.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace kflow::io {

using json = nlohmann::ordered_json;

/// Input does not match the task-file schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {"blocks":[{"dim":n,"weight":w,"ideal":bool}, ...]}
VnAlgebra algebra_from_json(const json& j);
json algebra_to_json(const VnAlgebra& alg);

/// Per-block nested arrays of [re, im] pairs: [[[ [re,im], ... ], ...], ...].
BlockOperator operator_from_json(const json& j, const VnAlgebra& alg);
json operator_to_json(const BlockOperator& op);

json k0_to_json(const K0Class& c);

/// Deterministic JSON text: keys in insertion order, doubles as %.17g,
/// non-finite doubles as null.
std::string dump(const json& j, int indent = 2);
void write(std::ostream& os, const json& j, int indent = 2);

/// %.17g formatting used by reports and CSV tracks.
std::string format_double(double x);

}  // namespace kflow::io
