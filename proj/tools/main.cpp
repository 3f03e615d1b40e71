// Copyright 2026 The shuffledp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "experiment.hpp"
#include "shuffledp/accountant.hpp"
#include "shuffledp/errors.hpp"
#include "shuffledp/optimizer.hpp"
#include "shuffledp/simulator.hpp"

namespace {

using shuffledp::Family;
using shuffledp::RandomizerSpec;
using ordered_json = nlohmann::ordered_json;

struct GlobalOpts {
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  std::string output;
};

void Emit(const GlobalOpts& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.output, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + g.output);
  out << text;
}

RandomizerSpec SpecFromFlags(const std::string& family, int d, double gamma,
                             double sigma0, double p, double theta) {
  if (family == "bmg") return RandomizerSpec::Bmg(d, gamma, sigma0);
  if (family == "gaussian") return RandomizerSpec::GaussianLocal(d, sigma0);
  if (family == "rr") return RandomizerSpec::RandomizedResponse(p);
  if (family == "privunit") return RandomizerSpec::PrivUnit(d, p, theta);
  throw std::invalid_argument("unknown family: " + family +
                              " (expected bmg|gaussian|rr|privunit)");
}

ordered_json McToJson(const shuffledp::McEstimate& mc) {
  ordered_json j;
  j["estimate"] = mc.estimate;
  j["half_width"] = mc.half_width;
  j["samples"] = mc.samples;
  return j;
}

int CmdChi(const GlobalOpts& g, const std::string& family, int d, double gamma,
           double sigma0, double p, double theta, int64_t mc_samples) {
  const RandomizerSpec spec = SpecFromFlags(family, d, gamma, sigma0, p, theta);
  const shuffledp::ShuffleIndexReport report =
      shuffledp::MakeShuffleIndexReport(spec, mc_samples, g.seed, g.threads);
  ordered_json j;
  j["family"] = family;
  ordered_json params;
  params["d"] = spec.dim;
  if (spec.family == Family::kBmg) {
    params["gamma"] = spec.gamma;
    params["sigma0"] = spec.sigma0;
  } else if (spec.family == Family::kGaussianLocal) {
    params["sigma0"] = spec.sigma0;
  } else if (spec.family == Family::kRandomizedResponse) {
    params["p"] = spec.p;
  } else {
    params["p"] = spec.p;
    params["theta"] = spec.theta;
  }
  j["params"] = params;
  if (report.chi_lo.has_value()) {
    if (report.chi_lo->is_infinite) {
      j["chi_lo"] = "infinite";
    } else {
      j["chi_lo"] = report.chi_lo->value;
    }
  } else {
    j["chi_lo"] = nullptr;
  }
  if (report.chi_chua.has_value()) j["chi_chua"] = *report.chi_chua;
  if (report.mc_variance.has_value()) {
    ordered_json mc = McToJson(*report.mc_variance);
    mc["reference"] = report.reference;
    if (report.chi_lo.has_value() && !report.chi_lo->is_infinite &&
        report.mc_variance->estimate > 0.0) {
      // gamma / Var[l_0] cross-check; gamma depends on the family.
      double blanket_mass = 0.0;
      if (spec.family == Family::kBmg) {
        blanket_mass = spec.gamma;
      } else if (spec.family == Family::kRandomizedResponse) {
        blanket_mass = 2.0 * (1.0 - spec.p);
      } else if (spec.family == Family::kPrivUnit) {
        const auto cm = shuffledp::ComputeCapMoments(spec.theta, spec.dim);
        blanket_mass = std::min(spec.p / (1.0 - cm.q), (1.0 - spec.p) / cm.q);
      }
      if (blanket_mass > 0.0) {
        mc["chi_from_mc"] = std::sqrt(blanket_mass / report.mc_variance->estimate);
      }
    }
    j["mc"] = mc;
  }
  if (!report.note.empty()) j["note"] = report.note;
  Emit(g, j.dump(2) + "\n");
  return 0;
}

int CmdDelta(const GlobalOpts& g, const std::string& method, int64_t n,
             double gamma, double sigma0, double eps, double sigma, double chi,
             int64_t trials, int64_t grid_points, bool replace_one) {
  ordered_json j;
  j["method"] = method;
  j["n"] = n;
  double out_eps = eps;
  double out_delta = 0.0;
  if (method == "fft") {
    const shuffledp::ProfilePoint pp =
        shuffledp::FftDeltaBmg(n, gamma, sigma0, eps, grid_points);
    out_delta = pp.delta;
    j["gamma"] = gamma;
    j["sigma0"] = sigma0;
    j["error_budget"] = pp.error_budget;
    if (pp.below_floor) j["below_floor"] = true;
  } else if (method == "mc") {
    const shuffledp::McEstimate mc =
        shuffledp::McDeltaBmg(n, gamma, sigma0, eps, trials, g.seed, g.threads);
    out_delta = mc.estimate;
    j["gamma"] = gamma;
    j["sigma0"] = sigma0;
    j["half_width"] = mc.half_width;
    j["trials"] = mc.samples;
  } else if (method == "gaussian") {
    const double sn = std::sqrt(static_cast<double>(n));
    out_delta = shuffledp::GaussianProfileDelta(
        sigma / sn, 1.0 / static_cast<double>(n), eps);
    j["sigma"] = sigma;
  } else if (method == "template") {
    out_delta = shuffledp::TemplateDelta(n, eps, chi);
    j["chi"] = chi;
  } else {
    throw std::invalid_argument("unknown method: " + method +
                                " (expected fft|mc|gaussian|template)");
  }
  if (replace_one) {
    // Zero-out guarantees convert to replace-one at (2 eps, 2 delta).
    out_eps = 2.0 * eps;
    out_delta = std::min(1.0, 2.0 * out_delta);
    j["adjacency"] = "replace-one";
  } else {
    j["adjacency"] = "zero-out";
  }
  j["eps"] = out_eps;
  j["delta"] = out_delta;
  Emit(g, j.dump(2) + "\n");
  return 0;
}

int CmdCalibrate(const GlobalOpts& g, const std::string& target, int64_t n,
                 double gamma, double sigma0, double eps, double delta,
                 int64_t grid_points) {
  ordered_json j;
  j["target"] = target;
  j["n"] = n;
  j["delta_target"] = delta;
  if (target == "bmg-eps") {
    const double e = shuffledp::CalibrateEpsBmg(n, gamma, sigma0, delta,
                                                grid_points);
    j["gamma"] = gamma;
    j["sigma0"] = sigma0;
    j["eps"] = e;
    const auto pp = shuffledp::FftDeltaBmg(n, gamma, sigma0, e, grid_points);
    j["delta_at_eps"] = pp.delta;
    j["delta_method"] = shuffledp::ProfileMethodName(pp.method);
  } else if (target == "gm-sigma") {
    const double s = shuffledp::CalibrateSigmaGm(n, eps, delta);
    j["eps"] = eps;
    j["sigma"] = s;
    j["rmse"] = s / std::sqrt(static_cast<double>(n));
    j["delta_method"] = "analytic-gaussian";
  } else {
    throw std::invalid_argument("unknown target: " + target +
                                " (expected bmg-eps|gm-sigma)");
  }
  Emit(g, j.dump(2) + "\n");
  return 0;
}

int CmdOptimize(const GlobalOpts& g, double chi, int d, int64_t n) {
  const shuffledp::GammaOpt opt = shuffledp::OptimizeGamma(d, chi);
  const double sigma0 = shuffledp::Sigma0FromChi(opt.gamma, chi);
  ordered_json j;
  j["chi"] = chi;
  j["d"] = d;
  j["gamma"] = opt.gamma;
  j["sigma0"] = sigma0;
  j["err1"] = opt.err1;
  if (n > 0) {
    const auto rb = shuffledp::MakeRiskBreakdown(opt.err1, d, n);
    j["n"] = n;
    j["err_n"] = rb.err_n;
    j["rmse"] = rb.rmse;
  }
  j["chi_lo_check"] = shuffledp::ChiLoBmg(opt.gamma, sigma0);
  Emit(g, j.dump(2) + "\n");
  return 0;
}

int CmdSimulate(const GlobalOpts& g, const std::string& family, int d,
                double gamma, double sigma0, double p, double theta, int64_t n,
                int64_t trials, const std::string& inputs,
                const std::string& mode, double gm_sigma) {
  ordered_json j;
  if (family == "gm") {
    const auto mc =
        shuffledp::SimulateGmMse(gm_sigma, n, d, trials, g.seed, g.threads);
    j["mechanism"] = "gm";
    j["n"] = n;
    j["d"] = d;
    j["sigma"] = gm_sigma;
    j["mse"] = McToJson(mc);
    j["mse_closed_form"] =
        static_cast<double>(d) * gm_sigma * gm_sigma / static_cast<double>(n);
    Emit(g, j.dump(2) + "\n");
    return 0;
  }
  const RandomizerSpec spec = SpecFromFlags(family, d, gamma, sigma0, p, theta);
  shuffledp::ProtocolRun run;
  run.spec = spec;
  run.n = n;
  run.trials = trials;
  run.seed = g.seed;
  run.threads = g.threads;
  if (inputs == "worst") {
    run.inputs = shuffledp::WorstCaseInputs(spec, n);
  } else if (inputs == "sphere") {
    run.inputs = shuffledp::RandomSphereInputs(spec, n, g.seed);
  } else {
    throw std::invalid_argument("unknown inputs: " + inputs +
                                " (expected worst|sphere)");
  }
  j["mechanism"] = family;
  j["n"] = n;
  j["d"] = spec.dim;
  j["inputs"] = inputs;
  j["trials"] = trials;
  if (mode == "mse") {
    const auto mc = shuffledp::SimulateMse(run);
    j["mse"] = McToJson(mc);
  } else if (mode == "bias") {
    const auto bias = shuffledp::SimulateUnbiasedness(run);
    j["bias"] = bias.bias;
    j["bias_half_width"] = bias.half_width;
  } else {
    throw std::invalid_argument("unknown mode: " + mode +
                                " (expected mse|bias)");
  }
  Emit(g, j.dump(2) + "\n");
  return 0;
}

int CmdExperiment(const GlobalOpts& g, const std::string& config_path) {
  shuffledp::ExperimentConfig cfg =
      shuffledp::ExperimentConfig::ParseFile(config_path);
  if (g.seed_set) cfg.seed = g.seed;
  const std::string csv = shuffledp::RunExperiment(cfg, g.threads);
  std::string out_path = g.output.empty() ? cfg.output : g.output;
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
    out << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shuffledp: numerics for single-message shuffle DP"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "rng seed")->each([&](const std::string&) {
    g.seed_set = true;
  });
  app.add_option("--threads", g.threads, "worker threads");
  app.add_option("--output", g.output, "output file (default stdout)");

  std::string family = "bmg", method = "fft", target = "bmg-eps";
  std::string inputs = "worst", mode = "mse", config_path;
  int d = 1;
  double gamma = 0.5, sigma0 = 1.0, p = 0.75, theta = 0.0;
  double eps = 0.1, delta = 1e-5, sigma = 1.0, chi = 1.0, gm_sigma = 1.0;
  int64_t n = 1000, trials = 100000, mc_samples = 0, grid_points = 0;

  auto* chi_cmd = app.add_subcommand("chi", "closed-form shuffle indices");
  chi_cmd->add_option("--family", family);
  chi_cmd->add_option("--d", d);
  chi_cmd->add_option("--gamma", gamma);
  chi_cmd->add_option("--sigma0", sigma0);
  chi_cmd->add_option("--p", p);
  chi_cmd->add_option("--theta", theta);
  chi_cmd->add_option("--mc-samples", mc_samples,
                      "Monte Carlo Var[l_0] cross-check sample count");

  auto* delta_cmd = app.add_subcommand("delta", "privacy profile point");
  delta_cmd->add_option("--method", method, "fft|mc|gaussian|template");
  delta_cmd->add_option("--n", n);
  delta_cmd->add_option("--gamma", gamma);
  delta_cmd->add_option("--sigma0", sigma0);
  delta_cmd->add_option("--eps", eps);
  delta_cmd->add_option("--sigma", sigma, "GM per-user sigma");
  delta_cmd->add_option("--chi", chi);
  delta_cmd->add_option("--trials", trials);
  delta_cmd->add_option("--grid-points", grid_points);
  bool replace_one = false;
  delta_cmd->add_flag("--replace-one", replace_one,
                      "report the (2eps, 2delta) replace-one conversion");

  auto* cal_cmd = app.add_subcommand("calibrate", "privacy calibration");
  cal_cmd->add_option("--target", target, "bmg-eps|gm-sigma");
  cal_cmd->add_option("--n", n);
  cal_cmd->add_option("--gamma", gamma);
  cal_cmd->add_option("--sigma0", sigma0);
  cal_cmd->add_option("--eps", eps);
  cal_cmd->add_option("--delta", delta);
  cal_cmd->add_option("--grid-points", grid_points);

  auto* opt_cmd = app.add_subcommand("optimize", "risk-optimal BMG parameters");
  opt_cmd->add_option("--chi", chi)->required();
  opt_cmd->add_option("--d", d);
  int64_t opt_n = 0;
  opt_cmd->add_option("--n", opt_n, "also report Err_n and RMSE at this n");

  auto* sim_cmd = app.add_subcommand("simulate", "protocol Monte Carlo");
  sim_cmd->add_option("--family", family, "bmg|gaussian|rr|privunit|gm");
  sim_cmd->add_option("--d", d);
  sim_cmd->add_option("--gamma", gamma);
  sim_cmd->add_option("--sigma0", sigma0);
  sim_cmd->add_option("--p", p);
  sim_cmd->add_option("--theta", theta);
  sim_cmd->add_option("--n", n);
  sim_cmd->add_option("--trials", trials);
  sim_cmd->add_option("--inputs", inputs, "worst|sphere");
  sim_cmd->add_option("--mode", mode, "mse|bias");
  sim_cmd->add_option("--sigma", gm_sigma, "GM per-user sigma");

  auto* exp_cmd = app.add_subcommand("experiment", "CSV sweep from a config");
  exp_cmd->add_option("--config", config_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (chi_cmd->parsed()) {
      return CmdChi(g, family, d, gamma, sigma0, p, theta, mc_samples);
    }
    if (delta_cmd->parsed()) {
      return CmdDelta(g, method, n, gamma, sigma0, eps, sigma, chi, trials,
                      grid_points, replace_one);
    }
    if (cal_cmd->parsed()) {
      return CmdCalibrate(g, target, n, gamma, sigma0, eps, delta, grid_points);
    }
    if (opt_cmd->parsed()) {
      return CmdOptimize(g, chi, d, opt_n);
    }
    if (sim_cmd->parsed()) {
      return CmdSimulate(g, family, d, gamma, sigma0, p, theta, n, trials,
                         inputs, mode, gm_sigma);
    }
    if (exp_cmd->parsed()) {
      return CmdExperiment(g, config_path);
    }
  } catch (const shuffledp::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
