// Copyright 2026 The FedSel Authors
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

// Command-line front end: run, audit, compare, gen-data.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "fedsel/datasets.h"
#include "fedsel/experiment.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int ExitFor(const absl::Status& status) {
  std::cerr << "fedsel: " << status.message() << "\n";
  return absl::IsInvalidArgument(status) ? kExitUsage : kExitFailure;
}

// Flag name -> config key. Every flag takes a string and is applied through
// the same parser as config files, so both paths validate identically.
const std::vector<std::pair<std::string, std::string>>& OverrideFlags() {
  static const auto* flags =
      new std::vector<std::pair<std::string, std::string>>{
          {"dataset", "dataset"},
          {"solution", "solution"},
          {"select", "selection"},
          {"perturb", "perturbation"},
          {"model", "model"},
          {"eps", "epsilon"},
          {"epochs", "epochs"},
          {"mu", "mu"},
          {"theta", "theta"},
          {"k-fraction", "k_fraction"},
          {"eta", "eta"},
          {"alpha", "alpha"},
          {"lambda", "lambda"},
          {"m-fraction", "m_fraction"},
          {"batch-size", "batch_size"},
          {"compression-ratio", "compression_ratio"},
          {"repeats", "repeats"},
          {"folds", "folds"},
          {"eval-every", "eval_every"},
          {"seed", "seed"},
          {"threads", "threads"},
      };
  return *flags;
}

struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;  // raw key=value
  bool control = false;
  bool wall_time = false;

  void Register(CLI::App* app) {
    for (const auto& [flag, key] : OverrideFlags()) {
      app->add_option("--" + flag, values[key], "config key '" + key + "'");
    }
    app->add_flag("--control", control,
                  "control variant: full eps' for values plus eps1 extra");
    app->add_flag("--wall-time", wall_time,
                  "record wall-clock ms per round (breaks byte equality)");
    app->add_option("--set", sets, "extra key=value config override");
  }

  absl::Status Apply(fedsel::ExperimentConfig& config) const {
    for (const auto& [key, value] : values) {
      if (value.empty()) continue;
      if (absl::Status s = fedsel::SetConfigValue(config, key, value);
          !s.ok()) {
        return s;
      }
    }
    for (const std::string& kv : sets) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        return absl::InvalidArgumentError("--set expects key=value, got '" +
                                          kv + "'");
      }
      if (absl::Status s = fedsel::SetConfigValue(config, kv.substr(0, eq),
                                                  kv.substr(eq + 1));
          !s.ok()) {
        return s;
      }
    }
    if (control) config.control = true;
    if (wall_time) config.wall_time = true;
    return absl::OkStatus();
  }
};

absl::StatusOr<fedsel::ExperimentConfig> BuildConfig(
    const std::string& path, const Overrides& overrides) {
  fedsel::ExperimentConfig config;
  if (!path.empty()) {
    absl::StatusOr<fedsel::ExperimentConfig> loaded =
        fedsel::LoadConfigFile(path);
    if (!loaded.ok()) return loaded.status();
    config = *std::move(loaded);
  }
  if (absl::Status s = overrides.Apply(config); !s.ok()) return s;
  // Validate up front so a bad config never starts a run.
  if (auto t = fedsel::ToTrainingConfig(config); !t.ok()) return t.status();
  return config;
}

int DoRun(const std::string& config_path, const Overrides& overrides,
          const std::string& output, const std::string& summary_path) {
  absl::StatusOr<fedsel::ExperimentConfig> config =
      BuildConfig(config_path, overrides);
  if (!config.ok()) return ExitFor(config.status());
  if (!output.empty()) config->output = output;

  // Buffer the CSV so a failed run leaves no partial file behind.
  std::ostringstream csv;
  absl::StatusOr<fedsel::ExperimentSummary> summary =
      fedsel::RunExperiment(*config, &csv);
  if (!summary.ok()) return ExitFor(summary.status());

  if (config->output.empty() || config->output == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream out(config->output, std::ios::binary);
    out << csv.str();
    out.close();
    if (!out) {
      std::cerr << "fedsel: cannot write " << config->output << "\n";
      return kExitFailure;
    }
  }
  if (summary_path.empty()) {
    fedsel::WriteSummary(*summary, std::cerr);
  } else if (summary_path == "-") {
    fedsel::WriteSummary(*summary, std::cout);
  } else {
    std::ofstream out(summary_path, std::ios::binary);
    fedsel::WriteSummary(*summary, out);
    out.close();
    if (!out) {
      std::cerr << "fedsel: cannot write " << summary_path << "\n";
      return kExitFailure;
    }
  }
  return kExitOk;
}

absl::StatusOr<std::vector<double>> ParseDoubles(const std::string& text) {
  std::vector<double> out;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    double v = 0.0;
    if (!absl::SimpleAtod(part, &v)) {
      return absl::InvalidArgumentError("bad number '" + std::string(part) +
                                        "'");
    }
    out.push_back(v);
  }
  return out;
}

absl::StatusOr<std::vector<int>> ParseInts(const std::string& text) {
  std::vector<int> out;
  for (absl::string_view part : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    int v = 0;
    if (!absl::SimpleAtoi(part, &v)) {
      return absl::InvalidArgumentError("bad integer '" + std::string(part) +
                                        "'");
    }
    out.push_back(v);
  }
  return out;
}

int DoAudit(const std::string& fault, const std::string& eps,
            const std::string& dims, const std::string& ks,
            const std::string& value_eps, std::uint64_t seed) {
  fedsel::AuditOptions options;
  options.seed = seed;
  absl::StatusOr<fedsel::AuditFault> f = fedsel::ParseAuditFault(fault);
  if (!f.ok()) return ExitFor(f.status());
  options.fault = *f;
  if (!eps.empty()) {
    auto v = ParseDoubles(eps);
    if (!v.ok()) return ExitFor(v.status());
    for (double e : *v) {
      if (!(e >= 0.0)) {
        return ExitFor(absl::InvalidArgumentError("grid eps must be >= 0"));
      }
    }
    options.grid.epsilons = *v;
  }
  if (!dims.empty()) {
    auto v = ParseInts(dims);
    if (!v.ok()) return ExitFor(v.status());
    for (int d : *v) {
      if (d < 2 || d > 10) {
        return ExitFor(
            absl::InvalidArgumentError("grid dims must lie in [2, 10]"));
      }
    }
    options.grid.dims = *v;
  }
  if (!ks.empty()) {
    auto v = ParseInts(ks);
    if (!v.ok()) return ExitFor(v.status());
    for (int k : *v) {
      if (k < 1) return ExitFor(absl::InvalidArgumentError("grid k >= 1"));
    }
    options.grid.ks = *v;
  }
  if (!value_eps.empty()) {
    auto v = ParseDoubles(value_eps);
    if (!v.ok()) return ExitFor(v.status());
    for (double e : *v) {
      if (!(e > 0.0)) {
        return ExitFor(absl::InvalidArgumentError("value eps must be > 0"));
      }
    }
    options.value_epsilons = *v;
  }
  return fedsel::RunAudit(options, std::cout) ? kExitOk : kExitFailure;
}

int DoCompare(const std::vector<std::string>& config_paths,
              const Overrides& overrides, const std::string& gain_loss) {
  if (!gain_loss.empty()) {
    if (config_paths.size() > 1) {
      return ExitFor(absl::InvalidArgumentError(
          "--gain-loss takes at most one base config"));
    }
    absl::StatusOr<fedsel::ExperimentConfig> base = BuildConfig(
        config_paths.empty() ? "" : config_paths.front(), overrides);
    if (!base.ok()) return ExitFor(base.status());
    std::vector<std::string> mechanisms =
        absl::StrSplit(gain_loss, ',', absl::SkipEmpty());
    for (const std::string& m : mechanisms) {
      if (auto p = fedsel::ParseSelectionMechanism(m); !p.ok()) {
        return ExitFor(p.status());
      }
    }
    auto rows = fedsel::GainLossTable(*base, mechanisms);
    if (!rows.ok()) return ExitFor(rows.status());
    fedsel::PrintGainLoss(*base, *rows, std::cout);
    return kExitOk;
  }
  if (config_paths.size() < 2) {
    return ExitFor(absl::InvalidArgumentError(
        "compare needs at least two --config files (or --gain-loss)"));
  }
  std::vector<fedsel::ExperimentConfig> configs;
  for (const std::string& path : config_paths) {
    absl::StatusOr<fedsel::ExperimentConfig> c = BuildConfig(path, overrides);
    if (!c.ok()) return ExitFor(c.status());
    configs.push_back(*std::move(c));
  }
  auto rows = fedsel::Compare(configs);
  if (!rows.ok()) return ExitFor(rows.status());
  fedsel::PrintComparison(*rows, std::cout);
  return kExitOk;
}

int DoGenData(const std::string& spec_text, const std::string& output,
              const std::string& truth) {
  absl::string_view text = spec_text;
  absl::ConsumePrefix(&text, "syn:");
  absl::StatusOr<fedsel::SyntheticSpec> spec =
      fedsel::ParseSyntheticSpec(text);
  if (!spec.ok()) return ExitFor(spec.status());
  absl::StatusOr<fedsel::SyntheticData> data =
      fedsel::GenerateSynthetic(*spec);
  if (!data.ok()) return ExitFor(data.status());

  std::ostringstream body;
  if (absl::Status s = fedsel::WriteSparseText(data->data, body); !s.ok()) {
    return ExitFor(s);
  }
  if (output.empty() || output == "-") {
    std::cout << body.str();
  } else {
    std::ofstream out(output, std::ios::binary);
    out << body.str();
    out.close();
    if (!out) {
      std::cerr << "fedsel: cannot write " << output << "\n";
      return kExitFailure;
    }
  }
  if (!truth.empty()) {
    std::ofstream out(truth, std::ios::binary);
    char buf[32];
    for (double w : data->w_star) {
      auto res = std::to_chars(buf, buf + sizeof(buf), w);
      out << absl::string_view(buf, res.ptr - buf) << "\n";
    }
    out.close();
    if (!out) {
      std::cerr << "fedsel: cannot write " << truth << "\n";
      return kExitFailure;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated SGD under local differential privacy with private "
               "Top-k dimension selection"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "train across CV splits");
  std::string run_config;
  std::string run_output;
  std::string run_summary;
  Overrides run_overrides;
  run->add_option("--config", run_config, "key = value config file")
      ->check(CLI::ExistingFile);
  run->add_option("--output,-o", run_output, "metrics CSV path (- = stdout)");
  run->add_option("--summary", run_summary, "summary path (- = stdout, default stderr)");
  run_overrides.Register(run);

  CLI::App* audit = app.add_subcommand("audit", "privacy and math audit");
  std::string fault = "none";
  std::string grid_eps;
  std::string grid_dims;
  std::string grid_ks;
  std::string value_eps;
  std::uint64_t audit_seed = 1;
  audit->add_option("--fault", fault,
                    "negative control: none, pe-flip, pe-unsplit, double-charge");
  audit->add_option("--grid-eps", grid_eps, "comma-separated selection eps");
  audit->add_option("--grid-dims", grid_dims, "comma-separated d, 2..10");
  audit->add_option("--grid-ks", grid_ks, "comma-separated k");
  audit->add_option("--value-eps", value_eps, "comma-separated value eps");
  audit->add_option("--seed", audit_seed, "seed for the composition run");

  CLI::App* compare = app.add_subcommand("compare", "accuracy gain table");
  std::vector<std::string> compare_configs;
  std::string gain_loss;
  Overrides compare_overrides;
  compare->add_option("--config", compare_configs, "config file (repeat)")
      ->check(CLI::ExistingFile);
  compare->add_option("--gain-loss", gain_loss,
                      "mechanisms for a gain/loss table, e.g. exp,pe,ps");
  compare_overrides.Register(compare);

  CLI::App* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  std::string gen_spec;
  std::string gen_output;
  std::string gen_truth;
  gen->add_option("--spec", gen_spec, "d,n,c1,c2[,seed]")->required();
  gen->add_option("--output,-o", gen_output, "sparse text path (- = stdout)");
  gen->add_option("--truth", gen_truth, "write w* one value per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (run->parsed()) {
    return DoRun(run_config, run_overrides, run_output, run_summary);
  }
  if (audit->parsed()) {
    return DoAudit(fault, grid_eps, grid_dims, grid_ks, value_eps, audit_seed);
  }
  if (compare->parsed()) {
    return DoCompare(compare_configs, compare_overrides, gain_loss);
  }
  return DoGenData(gen_spec, gen_output, gen_truth);
}
