#include "cmaxent/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cmaxent::io {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw DataError("cannot serialise a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_value(std::ostream& out, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out << ",\n";
        first = false;
        out << pad << Json(key).dump() << ": ";
        write_value(out, value, depth + 1);
      }
      out << "\n" << close_pad << "}";
      return;
    }
    case Json::value_t::array: {
      // Numeric vectors and matrix rows stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (j.empty()) {
        out << "[]";
      } else if (flat) {
        out << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ", ";
          write_value(out, j[i], depth + 1);
        }
        out << "]";
      } else {
        out << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ",\n";
          out << pad;
          write_value(out, j[i], depth + 1);
        }
        out << "\n" << close_pad << "]";
      }
      return;
    }
    case Json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

double number_or_nan(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw DataError("expected a number, got " + j.dump());
  return j.get<double>();
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw DataError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("missing JSON key '") + key + "'");
  return *it;
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw DataError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

Vec2 vec2(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw DataError(std::string("'") + what + "' must be an array of 2 numbers");
  return {number_or_nan(j[0]), number_or_nan(j[1])};
}

Mat2 mat2(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw DataError(std::string("'") + what + "' must be a 2x2 array");
  Mat2 m;
  for (int r = 0; r < 2; ++r) {
    const Vec2 row = vec2(j[static_cast<std::size_t>(r)], what);
    m.row(r) = row.transpose();
  }
  return m;
}

Vec2 finite_vec2(const Json& j, const char* what) {
  const Vec2 v = vec2(j, what);
  if (!v.allFinite()) throw DataError(std::string("'") + what + "' must be finite");
  return v;
}

Mat2 finite_mat2(const Json& j, const char* what) {
  const Mat2 m = mat2(j, what);
  if (!m.allFinite()) throw DataError(std::string("'") + what + "' must be finite");
  return m;
}

Json nullable(double v, bool available) { return available ? Json(v) : Json(nullptr); }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line) + ": '" + t + "' is not a finite number");
  }
  return v;
}

}  // namespace

SampleSet read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line == "y,x1,x2") dim = 2;
    if (line == "y,x1,x2,x3,x4") dim = 4;
    if (dim == 0) throw DataError("CSV header must be 'y,x1,x2' or 'y,x1,x2,x3,x4'");
    break;
  }
  if (dim == 0) throw DataError("empty CSV input");

  SampleSet samples(dim);
  std::vector<double> x(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != dim + 1) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim + 1) + " fields");
    }
    const double y = parse_number(cells[0], line_no);
    if (y != 1.0 && y != -1.0) throw DataError("line " + std::to_string(line_no) + ": label must be -1 or 1");
    for (std::size_t i = 0; i < dim; ++i) x[i] = parse_number(cells[i + 1], line_no);
    samples.add(static_cast<int>(y), x);
  }
  return samples;
}

SampleSet read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const SampleSet& samples) {
  out << (samples.dim() == 4 ? "y,x1,x2,x3,x4\n" : "y,x1,x2\n");
  for (std::size_t r = 0; r < samples.size(); ++r) {
    out << samples.label(r);
    for (double v : samples.x(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Json& value) {
  write_value(out, value, 0);
  out << '\n';
}

std::string dump(const Json& value) {
  std::ostringstream os;
  write_json(os, value);
  return os.str();
}

Json parse_json(std::istream& in) {
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
}

Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_json(in);
}

Json to_json(const Vec2& v) { return Json::array({v(0), v(1)}); }

Json to_json(const Mat2& m) { return Json::array({to_json(Vec2(m.row(0))), to_json(Vec2(m.row(1)))}); }

Json to_json(const MomentSpec& spec) {
  Json j;
  j["q"] = spec.q;
  j["xbar"] = to_json(spec.xbar);
  j["phi"] = Json::array({spec.phi(0), nullable(spec.phi(1), spec.avail_phi2)});
  j["sigma_x"] = Json::array({Json::array({spec.sigma_x(0, 0), nullable(spec.sigma_x(0, 1), spec.avail_s12)}),
                              Json::array({nullable(spec.sigma_x(1, 0), spec.avail_s12), spec.sigma_x(1, 1)})});
  j["avail_phi2"] = spec.avail_phi2;
  j["avail_s12"] = spec.avail_s12;
  return j;
}

Json to_json(const GaussianParams& params) {
  Json j;
  j["mean"] = to_json(params.mean);
  j["cov"] = to_json(params.cov);
  return j;
}

Json to_json(const CausalModel& model) {
  Json j;
  j["lambda0"] = model.lambda0;
  j["lambda"] = to_json(model.lambda);
  j["marginal"] = to_json(model.marginal);
  return j;
}

Json to_json(const AnticausalModel& model) {
  Json j;
  j["q"] = model.q;
  j["mu_plus"] = to_json(model.mu_plus);
  j["mu_minus"] = to_json(model.mu_minus);
  j["sigma_cond_plus"] = to_json(model.sigma_cond_plus);
  j["sigma_cond_minus"] = to_json(model.sigma_cond_minus);
  Json meta = Json::object();
  if (model.meta.imputed_phi2) meta["imputed_phi2"] = *model.meta.imputed_phi2;
  if (model.meta.strategy) meta["strategy"] = to_string(*model.meta.strategy);
  if (!model.meta.warnings.empty()) meta["warnings"] = model.meta.warnings;
  j["meta"] = meta;
  return j;
}

Json to_json(const CombinedModel& model) {
  Json j;
  j["causal_part"] = to_json(model.causal_part);
  j["anticausal_part"] = to_json(model.anticausal_part);
  return j;
}

Json to_json(const CombinedSpec& spec) {
  Json j;
  j["cause"] = to_json(spec.cause);
  j["effect"] = to_json(spec.effect);
  return j;
}

Json to_json(const DecisionBoundary& boundary) {
  Json j;
  j["w"] = to_json(boundary.w);
  j["b"] = boundary.b;
  j["canonical"] = true;
  return j;
}

MomentSpec moment_spec_from_json(const Json& j) {
  MomentSpec spec;
  spec.q = number(j, "q");
  spec.xbar = finite_vec2(field(j, "xbar"), "xbar");
  spec.phi = vec2(field(j, "phi"), "phi");
  spec.sigma_x = mat2(field(j, "sigma_x"), "sigma_x");
  if (!std::isfinite(spec.phi(0))) throw DataError("phi[0] must be a finite number");
  if (!std::isfinite(spec.sigma_x(0, 0)) || !std::isfinite(spec.sigma_x(1, 1))) {
    throw DataError("diagonal of sigma_x must be finite");
  }
  const bool has_phi2 = std::isfinite(spec.phi(1));
  const bool has_s12 = std::isfinite(spec.sigma_x(0, 1)) && std::isfinite(spec.sigma_x(1, 0));
  spec.avail_phi2 = j.contains("avail_phi2") ? field(j, "avail_phi2").get<bool>() : has_phi2;
  spec.avail_s12 = j.contains("avail_s12") ? field(j, "avail_s12").get<bool>() : has_s12;
  if (spec.avail_phi2 && !has_phi2) throw DataError("avail_phi2 is true but phi[1] is missing");
  if (spec.avail_s12 && !has_s12) throw DataError("avail_s12 is true but sigma_x off-diagonal is missing");
  if (!spec.avail_phi2) spec.phi(1) = std::numeric_limits<double>::quiet_NaN();
  if (!spec.avail_s12) spec.sigma_x(0, 1) = spec.sigma_x(1, 0) = std::numeric_limits<double>::quiet_NaN();
  return spec;
}

CombinedSpec combined_spec_from_json(const Json& j) {
  return {moment_spec_from_json(field(j, "cause")), moment_spec_from_json(field(j, "effect"))};
}

CausalModel causal_model_from_json(const Json& j) {
  CausalModel model;
  model.lambda0 = number(j, "lambda0");
  model.lambda = finite_vec2(field(j, "lambda"), "lambda");
  const Json& marginal = field(j, "marginal");
  model.marginal.mean = finite_vec2(field(marginal, "mean"), "marginal.mean");
  model.marginal.cov = finite_mat2(field(marginal, "cov"), "marginal.cov");
  return model;
}

AnticausalModel anticausal_model_from_json(const Json& j) {
  AnticausalModel model;
  model.q = number(j, "q");
  model.mu_plus = finite_vec2(field(j, "mu_plus"), "mu_plus");
  model.mu_minus = finite_vec2(field(j, "mu_minus"), "mu_minus");
  model.sigma_cond_plus = finite_mat2(field(j, "sigma_cond_plus"), "sigma_cond_plus");
  model.sigma_cond_minus = finite_mat2(field(j, "sigma_cond_minus"), "sigma_cond_minus");
  if (j.contains("meta")) {
    const Json& meta = j["meta"];
    if (meta.contains("imputed_phi2")) model.meta.imputed_phi2 = number(meta, "imputed_phi2");
    if (meta.contains("strategy")) model.meta.strategy = parse_strategy(field(meta, "strategy").get<std::string>());
  }
  return model;
}

CombinedModel combined_model_from_json(const Json& j) {
  return {causal_model_from_json(field(j, "causal_part")), anticausal_model_from_json(field(j, "anticausal_part"))};
}

}  // namespace cmaxent::io
