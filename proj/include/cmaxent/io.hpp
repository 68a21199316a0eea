#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "cmaxent/anticausal.hpp"
#include "cmaxent/boundary.hpp"
#include "cmaxent/causal.hpp"
#include "cmaxent/combined.hpp"
#include "cmaxent/moments.hpp"

namespace cmaxent::io {

using Json = nlohmann::ordered_json;

// ---- CSV: header y,x1,x2[,x3,x4]; labels -1/+1 ----

SampleSet read_csv(std::istream& in);
SampleSet read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const SampleSet& samples);

// ---- JSON ----

/// Serialises with 17 significant digits for every floating-point number,
/// two-space indentation and a trailing newline. Output is byte-stable.
void write_json(std::ostream& out, const Json& value);
std::string dump(const Json& value);

Json parse_json(std::istream& in);
Json parse_json_file(const std::string& path);

Json to_json(const Vec2& v);
Json to_json(const Mat2& m);
Json to_json(const MomentSpec& spec);
Json to_json(const GaussianParams& params);
Json to_json(const CausalModel& model);
Json to_json(const AnticausalModel& model);
Json to_json(const CombinedModel& model);
Json to_json(const CombinedSpec& spec);
Json to_json(const DecisionBoundary& boundary);

/// Unknown phi2 / s12 entries may be null; availability flags default to
/// whether the entries are present.
MomentSpec moment_spec_from_json(const Json& j);
CombinedSpec combined_spec_from_json(const Json& j);
CausalModel causal_model_from_json(const Json& j);
AnticausalModel anticausal_model_from_json(const Json& j);
CombinedModel combined_model_from_json(const Json& j);

}  // namespace cmaxent::io
