#include "cmaxent/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cmaxent/anticausal.hpp"
#include "cmaxent/boundary.hpp"
#include "cmaxent/causal.hpp"
#include "cmaxent/combined.hpp"
#include "cmaxent/datagen.hpp"
#include "cmaxent/grid_oracle.hpp"
#include "cmaxent/io.hpp"

namespace cmaxent::cli {

namespace {

using io::Json;

constexpr double kParallelTol = 1e-8;
constexpr double kDiscrepancyTol = 1e-9;

struct Streams {
  const RunConfig& config;
  std::istream& in;
  std::ostream& out;

  Json read_json() const { return config.in ? io::parse_json_file(*config.in) : io::parse_json(in); }

  SampleSet read_csv() const { return config.in ? io::read_csv_file(*config.in) : io::read_csv(in); }

  void emit(const std::function<void(std::ostream&)>& write) const {
    if (!config.out) {
      write(out);
      return;
    }
    write_file(*config.out, write);
  }

  static void write_file(const std::string& path, const std::function<void(std::ostream&)>& write) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot write '" + path + "'");
    write(file);
    if (!file) throw DataError("failed writing '" + path + "'");
  }
};

// Applies --missing to the spec and checks that what remains is supported.
MomentSpec apply_missing(MomentSpec spec, const std::string& missing) {
  if (missing == "none") {
    if (!spec.avail_phi2) throw DataError("spec has no phi2; pass --missing phi2");
    if (!spec.avail_s12) throw DataError("spec has no s12; pass --missing s12");
  } else if (missing == "phi2") {
    if (!spec.avail_s12) throw DataError("phi2 and s12 cannot both be missing");
    spec.avail_phi2 = false;
    spec.phi(1) = std::nan("");
  } else {
    if (!spec.avail_phi2) throw DataError("phi2 and s12 cannot both be missing");
    spec.avail_s12 = false;
    spec.sigma_x(0, 1) = spec.sigma_x(1, 0) = std::nan("");
  }
  return spec;
}

ImputeStrategy strategy_of(const RunConfig& config) {
  return config.strategy ? parse_strategy(*config.strategy) : ImputeStrategy::EntropyArgmax;
}

CausalModel fit_causal_for(const MomentSpec& spec, const std::string& missing) {
  if (missing == "phi2") return fit_causal_missing_phi2(spec);
  if (missing == "s12") return fit_causal_missing_s12(spec);
  return fit_causal(spec);
}

AnticausalModel fit_anticausal_for(const MomentSpec& spec, const std::string& missing, ImputeStrategy strategy) {
  if (missing == "phi2") return fit_anticausal_missing_phi2(spec, strategy);
  if (missing == "s12") return fit_anticausal_missing_s12(spec);
  return fit_anticausal(spec);
}

// Both candidate phi2 values, with a discrepancy entry when they differ.
Json phi2_report(const MomentSpec& spec) {
  Json j;
  const double star = det_argmax_phi2(spec).phi2_star;
  const double paper = phi2_upper_bound(spec);
  j["phi2_star"] = star;
  j["phi2_paper"] = paper;
  if (std::abs(star - paper) > kDiscrepancyTol) j["discrepancy"] = star - paper;
  return j;
}

std::optional<DecisionBoundary> try_boundary(const std::function<DecisionBoundary()>& make) {
  try {
    return make();
  } catch (const DataError&) {
    return std::nullopt;
  }
}

Json boundary_json(const std::optional<DecisionBoundary>& b) { return b ? io::to_json(*b) : Json(nullptr); }

void parallel_json(const Vec2& w1, const Vec2& w2, Json& report) {
  if (w1.isZero(0.0) || w2.isZero(0.0)) {
    report["parallel"] = nullptr;
    report["angle_radians"] = nullptr;
    report["degenerate"] = true;
  } else {
    report["parallel"] = parallel(w1, w2, kParallelTol);
    report["angle_radians"] = angle_between(w1, w2);
  }
}

// ---- subcommands ----

int cmd_moments(const Streams& s) {
  const SampleSet samples = s.read_csv();
  Json j;
  if (samples.dim() == 4) {
    const CombinedSpec spec = estimate_combined_moments(samples);
    require_valid(spec.cause);
    require_valid(spec.effect);
    j = io::to_json(spec);
  } else {
    const MomentSpec spec = estimate_moments(samples);
    require_valid(spec);
    j = io::to_json(spec);
  }
  s.emit([&](std::ostream& os) { io::write_json(os, j); });
  return kExitOk;
}

int cmd_fit(const Streams& s) {
  const RunConfig& c = s.config;
  const std::string direction = c.direction.value_or("causal");
  const Json input = s.read_json();
  Json j;
  Json meta;
  if (direction == "combined") {
    j = io::to_json(fit_combined(io::combined_spec_from_json(input)));
    meta["direction"] = direction;
  } else {
    const MomentSpec spec = apply_missing(io::moment_spec_from_json(input), c.missing);
    if (direction == "causal") {
      j = io::to_json(fit_causal_for(spec, c.missing));
    } else {
      j = io::to_json(fit_anticausal_for(spec, c.missing, strategy_of(c)));
      meta = j["meta"];
    }
    meta["direction"] = direction;
    meta["missing"] = c.missing;
    if (c.missing == "phi2" && direction == "anticausal") {
      const Json phi2 = phi2_report(spec);
      for (const auto& [key, value] : phi2.items()) meta[key] = value;
    }
  }
  j["meta"] = meta;
  s.emit([&](std::ostream& os) { io::write_json(os, j); });
  return kExitOk;
}

int cmd_compare(const Streams& s) {
  const RunConfig& c = s.config;
  const MomentSpec spec = apply_missing(io::moment_spec_from_json(s.read_json()), c.missing);
  const CausalModel causal = fit_causal_for(spec, c.missing);
  const AnticausalModel anticausal = fit_anticausal_for(spec, c.missing, strategy_of(c));
  const auto bc = try_boundary([&] { return boundary_from_causal(causal); });
  const auto ba = try_boundary([&] { return boundary_from_anticausal(anticausal); });

  Json report;
  report["missing"] = c.missing;
  Vec2 nc;
  Vec2 na;
  if (c.missing == "none") {
    nc = normal_causal(spec);
    na = normal_anticausal(spec);
    parallel_json(nc, na, report);
    const auto sm = sherman_morrison_decompose(spec);
    report["k"] = sm.k;
    report["k_direct"] = sm.k_direct;
    report["sherman_morrison_relative_error"] = sm.relative_error;
  } else if (c.missing == "s12") {
    const Vec2 cxy = spec.cov_xy();
    const Vec2 var(spec.sigma_x(0, 0) - spec.xbar(0) * spec.xbar(0), spec.sigma_x(1, 1) - spec.xbar(1) * spec.xbar(1));
    nc = cxy.cwiseQuotient(var);
    na = cxy.cwiseQuotient(anticausal.sigma_cond_plus.diagonal());
    parallel_json(nc, na, report);
    report["ratio"] = partial_slope_ratio(spec);
  } else {
    nc = bc ? bc->w : Vec2::Zero();
    na = ba ? ba->w : Vec2::Zero();
    parallel_json(nc, na, report);
    const Json phi2 = phi2_report(spec);
    for (const auto& [key, value] : phi2.items()) report[key] = value;
    report["imputed_phi2"] = *anticausal.meta.imputed_phi2;
    report["strategy"] = to_string(*anticausal.meta.strategy);
  }
  report["normal_causal"] = io::to_json(nc);
  report["normal_anticausal"] = io::to_json(na);
  report["boundary_causal"] = boundary_json(bc);
  report["boundary_anticausal"] = boundary_json(ba);
  s.emit([&](std::ostream& os) { io::write_json(os, report); });
  return kExitOk;
}

int cmd_plot_data(const Streams& s) {
  const RunConfig& c = s.config;
  const MomentSpec spec = apply_missing(io::moment_spec_from_json(s.read_json()), c.missing);
  const CausalModel causal = fit_causal_for(spec, c.missing);
  const AnticausalModel anticausal = fit_anticausal_for(spec, c.missing, strategy_of(c));

  const Vec2 sd(std::sqrt(causal.marginal.cov(0, 0)), std::sqrt(causal.marginal.cov(1, 1)));
  const Vec2 lo = causal.marginal.mean - 3.0 * sd;
  const Vec2 hi = causal.marginal.mean + 3.0 * sd;
  const std::size_t n = c.grid;

  Streams::write_file(*c.out, [&](std::ostream& os) {
    os << "x1,x2,p_causal,p_anticausal\n";
    char buf[128];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double t1 = static_cast<double>(i) / static_cast<double>(n - 1);
        const double t2 = static_cast<double>(j) / static_cast<double>(n - 1);
        const Vec2 x(lo(0) + t1 * (hi(0) - lo(0)), lo(1) + t2 * (hi(1) - lo(1)));
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x(0), x(1), causal_posterior(causal, x),
                      anticausal_posterior(anticausal, x));
        os << buf;
      }
    }
  });

  const auto bc = try_boundary([&] { return boundary_from_causal(causal); });
  const auto ba = try_boundary([&] { return boundary_from_anticausal(anticausal); });
  auto line = [&](const std::optional<DecisionBoundary>& b) -> Json {
    if (!b) return nullptr;
    Json j = io::to_json(*b);
    const auto seg = clip_to_box(*b, lo, hi);
    j["segment"] = seg ? Json::array({io::to_json(seg->first), io::to_json(seg->second)}) : Json(nullptr);
    return j;
  };
  Json j;
  j["missing"] = c.missing;
  j["box"] = {{"lo", io::to_json(lo)}, {"hi", io::to_json(hi)}};
  j["causal"] = line(bc);
  j["anticausal"] = line(ba);
  if (bc && ba) {
    j["parallel"] = parallel(bc->w, ba->w, 1e-6);
    const double num = ba->w(0) * bc->w(1);
    const double den = ba->w(1) * bc->w(0);
    j["slope_ratio"] = (den != 0.0) ? Json(num / den) : Json(nullptr);
  } else {
    j["parallel"] = nullptr;
    j["slope_ratio"] = nullptr;
  }
  Streams::write_file(boundaries_path(*c.out), [&](std::ostream& os) { io::write_json(os, j); });
  return kExitOk;
}

int cmd_oracle(const Streams& s) {
  const RunConfig& c = s.config;
  const std::string direction = c.direction.value_or("both");
  const MomentSpec spec = apply_missing(io::moment_spec_from_json(s.read_json()), c.missing);

  Json report;
  report["grid"] = c.grid;
  report["threshold"] = kOracleThreshold;
  report["missing"] = c.missing;
  double worst_gap = 0.0;
  double worst_residual = 0.0;
  if (direction == "causal" || direction == "both") {
    const auto r = compare_causal(fit_causal_for(spec, c.missing), spec, c.grid);
    report["causal"] = {{"constraint_residuals", r.constraint_residual},
                        {"sup_norm_gap", r.sup_norm_gap},
                        {"iterations", r.iterations}};
    worst_gap = std::max(worst_gap, r.sup_norm_gap);
    worst_residual = std::max(worst_residual, r.constraint_residual);
  }
  if (direction == "anticausal" || direction == "both") {
    const auto model = fit_anticausal_for(spec, c.missing, strategy_of(c));
    const auto r = compare_anticausal(model, spec, c.grid);
    report["anticausal"] = {{"constraint_residuals", r.constraint_residual},
                            {"sup_norm_gap", r.max_gap()},
                            {"posterior_gap", r.sup_norm_gap},
                            {"mean_gap", r.mean_gap},
                            {"covariance_gap", r.covariance_gap},
                            {"iterations", r.iterations}};
    worst_gap = std::max(worst_gap, r.max_gap());
    worst_residual = std::max(worst_residual, r.constraint_residual);
  }
  if (c.missing == "phi2") {
    const Json phi2 = phi2_report(spec);
    for (const auto& [key, value] : phi2.items()) report[key] = value;
  }
  report["constraint_residuals"] = worst_residual;
  report["sup_norm_gap"] = worst_gap;
  const bool ok = worst_gap <= kOracleThreshold;
  report["within_threshold"] = ok;
  s.emit([&](std::ostream& os) { io::write_json(os, report); });
  return ok ? kExitOk : kExitThreshold;
}

int cmd_gen(const Streams& s) {
  const RunConfig& c = s.config;
  const Json model = s.read_json();
  SampleSet samples;
  if (model.contains("causal_part")) {
    samples = sample_combined(io::combined_model_from_json(model), c.n, c.seed);
  } else if (model.contains("lambda0")) {
    samples = sample_causal(io::causal_model_from_json(model), c.n, c.seed);
  } else if (model.contains("mu_plus")) {
    samples = sample_anticausal(io::anticausal_model_from_json(model), c.n, c.seed);
  } else {
    throw DataError("input is not a causal, anticausal or combined model");
  }
  s.emit([&](std::ostream& os) { io::write_csv(os, samples); });
  return kExitOk;
}

}  // namespace

std::string boundaries_path(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0) {
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".boundaries.json";
  }
  return csv_path + ".boundaries.json";
}

void validate(const RunConfig& c) {
  static const char* const commands[] = {"moments", "fit", "compare", "plot-data", "oracle", "gen"};
  if (std::find(std::begin(commands), std::end(commands), c.subcommand) == std::end(commands)) {
    throw UsageError("unknown subcommand '" + c.subcommand + "'");
  }
  if (c.missing != "none" && c.missing != "phi2" && c.missing != "s12") {
    throw UsageError("--missing must be none, phi2 or s12");
  }
  if (c.strategy) {
    if (*c.strategy != "paper" && *c.strategy != "entropy") throw UsageError("--strategy must be paper or entropy");
    if (c.missing != "phi2") throw UsageError("--strategy only applies with --missing phi2");
  }
  if (c.direction) {
    const std::string& d = *c.direction;
    const bool known = d == "causal" || d == "anticausal" || d == "combined" || d == "both";
    if (!known) throw UsageError("--direction must be causal, anticausal or combined");
    if (d == "both" && c.subcommand != "oracle") throw UsageError("--direction both is only valid for oracle");
    if (d == "combined" && c.subcommand != "fit") throw UsageError("--direction combined is only valid for fit");
    if (c.subcommand != "fit" && c.subcommand != "oracle") {
      throw UsageError("--direction is only valid for fit and oracle");
    }
    if (d == "combined" && c.missing != "none") throw UsageError("combined fits take full block moments only");
  }
  if (c.subcommand == "plot-data" && !c.out) throw UsageError("plot-data needs --out");
  if ((c.subcommand == "plot-data" || c.subcommand == "oracle") && c.grid < 3) {
    throw UsageError("--grid must be at least 3");
  }
  if (c.subcommand == "gen" && c.n == 0) throw UsageError("--n must be at least 1");
}

int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    const Streams s{config, in, out};
    const std::string& cmd = config.subcommand;
    if (cmd == "moments") return cmd_moments(s);
    if (cmd == "fit") return cmd_fit(s);
    if (cmd == "compare") return cmd_compare(s);
    if (cmd == "plot-data") return cmd_plot_data(s);
    if (cmd == "oracle") return cmd_oracle(s);
    return cmd_gen(s);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace cmaxent::cli
