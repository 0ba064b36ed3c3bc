// rfcpca: simulate, fit, select, evaluate, analyze, reproduce.
//
// Exit codes: 0 ok, 2 usage/config error, 3 I/O error, 4 fit error,
// 5 dataset-hash mismatch.

#include "rfcpca/analysis.hpp"
#include "rfcpca/errors.hpp"
#include "rfcpca/evaluation.hpp"
#include "rfcpca/experiments.hpp"
#include "rfcpca/io.hpp"
#include "rfcpca/robust.hpp"
#include "rfcpca/selection.hpp"
#include "rfcpca/simgen.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace rfcpca;

namespace {

enum Exit { kOk = 0, kUsage = 2, kIo = 3, kFit = 4, kHashMismatch = 5 };

struct ExitError {
  int code;
  std::string message;
};

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument: return kUsage;
    case ErrorCode::IoError: return kIo;
    default: return kFit;
  }
}

json envelope(const std::string& kind, const Provenance& prov) {
  return {{"schema_version", kJsonSchemaVersion}, {"kind", kind}, {"provenance", to_json(prov)}};
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
  json doc = read_json_file(a.config);
  SimulateConfig cfg = parse_simulate_config(doc);
  if (a.seed) cfg.clean.seed = cfg.burst.seed = cfg.blink.seed = *a.seed;

  SimulatedData sim = generate_clean_dataset(cfg.clean);
  if (cfg.contamination == Contamination::Burst) sim = inject_bursts(sim, cfg.burst);
  if (cfg.contamination == Contamination::EyeBlink) sim = inject_eyeblinks(sim, cfg.blink);

  const fs::path out(a.out);
  std::error_code ec;
  if (fs::is_directory(out, ec))
    for (const auto& f : trial_files(out)) fs::remove(f, ec);
  write_dataset(out, sim.data);
  sim.manifest.dataset_hash = dataset_hash(out);

  Provenance prov;
  prov.config_hash = config_hash(to_json(cfg));
  prov.dataset_hash = sim.manifest.dataset_hash;
  prov.seed = cfg.clean.seed;
  json manifest = to_json(sim.manifest);
  manifest["provenance"] = to_json(prov);
  write_json_file(out / "manifest.json", manifest);
  std::cerr << "wrote " << sim.data.size() << " trials to " << out.string() << " ("
            << sim.manifest.contaminated.size() << " contaminated)\n";
  return kOk;
}

// ---- fit / select -------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string memberships;
  std::string variant;
  std::string lambda;
  std::string subspace_rule;
  bool automatic = false;
  std::optional<int> clusters;
  std::optional<double> fuzziness;
  std::optional<double> alpha;
  std::optional<int> restarts;
  std::optional<std::uint64_t> seed;
};

FitConfig resolve_fit_config(const FitArgs& a) {
  FitConfig cfg;
  if (!a.config.empty()) cfg = parse_fit_config(read_json_file(a.config));
  if (!a.variant.empty()) {
    const auto v = parse_variant(a.variant);
    if (!v) fail(ErrorCode::ConfigError, "unknown variant '" + a.variant + "'");
    cfg.variant = *v;
  }
  if (a.automatic) cfg.automatic = true;
  if (a.clusters) cfg.clusters = *a.clusters;
  if (a.fuzziness) cfg.fuzziness = *a.fuzziness;
  if (a.alpha) cfg.alpha = *a.alpha;
  if (a.restarts) cfg.restarts = *a.restarts;
  if (a.seed) cfg.seed = *a.seed;
  if (!a.subspace_rule.empty()) {
    const auto r = parse_subspace_rule(a.subspace_rule);
    if (!r) fail(ErrorCode::ConfigError, "unknown subspace rule '" + a.subspace_rule + "'");
    cfg.subspace_rule = *r;
  }
  if (a.lambda == "auto") {
    cfg.lambda.reset();
  } else if (!a.lambda.empty()) {
    try {
      std::size_t used = 0;
      cfg.lambda = std::stod(a.lambda, &used);
      if (used != a.lambda.size()) throw std::invalid_argument(a.lambda);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "--lambda must be a number or 'auto'");
    }
  }
  return cfg;
}

SearchOptions search_options(const FitConfig& cfg) {
  SearchOptions s;
  s.variance = cfg.variance;
  s.max_iter = cfg.max_iter;
  s.tol = cfg.tol;
  s.restarts = cfg.restarts;
  s.subspace_rule = cfg.subspace_rule;
  if (cfg.lambda) s.noise.lambda = *cfg.lambda;
  return s;
}

FitOptions fit_options(const FitConfig& cfg) {
  FitOptions fo;
  fo.clusters = cfg.clusters;
  fo.fuzziness = cfg.fuzziness;
  fo.variance = cfg.variance;
  fo.max_iter = cfg.max_iter;
  fo.tol = cfg.tol;
  fo.subspace_rule = cfg.subspace_rule;
  fo.seed = cfg.seed;
  return fo;
}

void write_memberships_csv(const fs::path& path, const FitResult& fit,
                           const std::vector<std::string>& names) {
  std::string text = "series";
  for (int s = 0; s < fit.clusters; ++s) text += ",u" + std::to_string(s + 1);
  if (fit.variant == Variant::Noise) text += ",noise";
  text += '\n';
  for (Eigen::Index i = 0; i < fit.memberships.rows(); ++i) {
    text += static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)]
                                                       : std::to_string(i);
    for (Eigen::Index s = 0; s < fit.memberships.cols(); ++s)
      text += "," + format_double(fit.memberships(i, s));
    text += '\n';
  }
  write_text_file(path, text);
}

int cmd_fit(const FitArgs& a, bool select_only) {
  FitConfig cfg = resolve_fit_config(a);
  if (select_only) cfg.automatic = true;
  const MtsDataset data = read_dataset(a.data);
  Provenance prov;
  prov.config_hash = config_hash(to_json(cfg));
  prov.dataset_hash = dataset_hash(a.data);
  prov.seed = cfg.seed;

  json doc = envelope(select_only ? "selection" : "fit", prov);
  doc["config"] = to_json(cfg);
  doc["series"] = data.names;
  try {
    const FeatureSet features = build_features(data, cfg.max_lag);
    SearchOptions search = search_options(cfg);
    if (cfg.variant == Variant::Noise && !cfg.lambda) {
      const ElbowResult elbow = select_lambda_elbow(features, fit_options(cfg),
                                                    default_lambda_grid(20),
                                                    search.noise.schedule);
      search.noise.lambda = elbow.lambda;
      doc["elbow"] = to_json(elbow);
    }
    FitResult fit;
    if (cfg.automatic) {
      SearchGrid grid = SearchGrid::defaults(cfg.variant);
      if (a.clusters || !a.config.empty()) grid.clusters = {cfg.clusters};
      Selection sel = grid_search(features, grid, search, cfg.seed);
      doc["selection"] = to_json(sel.report);
      fit = std::move(sel.fit);
    } else {
      fit = fit_variant(features, cfg.variant, fit_options(cfg), search, cfg.alpha);
    }
    if (!select_only) {
      doc["fit"] = to_json(fit);
      doc["flagged"] = flag_outliers(fit);
      doc["outlier_rule"] = outlier_rule(fit.variant);
      try {
        doc["cvi"] = cvi(fit);
      } catch (const Error&) {
        doc["cvi"] = nullptr;  // undefined for a single cluster
      }
      if (!a.memberships.empty()) write_memberships_csv(a.memberships, fit, data.names);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    doc["error"] = {{"name", std::string(e.name())}, {"message", e.what()}};
    write_json_file(a.out, doc);
    std::cerr << "fit failed: " << e.what() << "\n";
    return kFit;
  }
  write_json_file(a.out, doc);
  return kOk;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string fit;
  std::string manifest;
  std::string out;
  std::string per_object;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (!fs::exists(a.manifest)) throw ExitError{kUsage, "manifest not found: " + a.manifest};
  const json fit_doc = read_json_file(a.fit);
  const json man_doc = read_json_file(a.manifest);
  if (!fit_doc.contains("fit")) fail(ErrorCode::ConfigError, a.fit + " holds no fit");
  const SimManifest manifest = manifest_from_json(man_doc);
  const std::string fit_hash =
      fit_doc.at("provenance").value("dataset_hash", std::string());
  if (fit_hash != manifest.dataset_hash)
    throw ExitError{kHashMismatch, "dataset hash mismatch: fit " + fit_hash + " vs manifest " +
                                       manifest.dataset_hash};
  const FitResult fit = fit_from_json(fit_doc.at("fit"));
  const EvalReport rep = evaluate_fit(fit, manifest.labels, manifest.contaminated);

  Provenance prov;
  prov.config_hash = fit_doc.at("provenance").value("config_hash", std::string());
  prov.dataset_hash = fit_hash;
  prov.seed = fit_doc.at("provenance").value("seed", std::uint64_t{0});
  json doc = envelope("evaluation", prov);
  doc["report"] = to_json(rep);
  write_json_file(a.out, doc);

  if (!a.per_object.empty()) {
    const auto hard = harden_fit(fit);
    std::vector<bool> flagged(fit.size(), false);
    for (std::size_t i : rep.flagged) flagged[i] = true;
    std::string text = "index,true_label,hard_label,max_membership,flagged\n";
    for (std::size_t i = 0; i < fit.size(); ++i) {
      const auto row = fit.memberships.row(static_cast<Eigen::Index>(i));
      text += std::to_string(i) + "," + std::to_string(manifest.labels.at(i)) + "," +
              (hard[i] ? std::to_string(*hard[i] + 1) : std::string("unassigned")) + "," +
              format_double(row.head(fit.clusters).maxCoeff()) + "," +
              (flagged[i] ? "1" : "0") + "\n";
    }
    write_text_file(a.per_object, text);
  }
  std::cout << "acc=" << (rep.acc_rand ? format_double(*rep.acc_rand) : "undefined")
            << " out=" << (rep.outlier_recall ? format_double(*rep.outlier_recall) : "undefined")
            << " flagged=" << rep.flagged.size() << "\n";
  return kOk;
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string fit;
  std::string data;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const json fit_doc = read_json_file(a.fit);
  if (!fit_doc.contains("fit")) fail(ErrorCode::ConfigError, a.fit + " holds no fit");
  const FitResult fit = fit_from_json(fit_doc.at("fit"));

  // Named subspaces per lag: regular clusters, plus the noise subspace.
  std::vector<std::pair<std::string, std::vector<Eigen::MatrixXd>>> named;
  for (std::size_t s = 0; s < fit.subspaces.size(); ++s) {
    std::vector<Eigen::MatrixXd> per_lag;
    for (const auto& ax : fit.subspaces.clusters[s]) per_lag.push_back(ax.axes);
    named.emplace_back("cluster" + std::to_string(s + 1), std::move(per_lag));
  }
  if (fit.variant == Variant::Noise && !a.data.empty()) {
    const FeatureSet features = build_features(read_dataset(a.data), fit.max_lag);
    std::vector<Eigen::MatrixXd> per_lag;
    for (const auto& ax : noise_subspace(features, fit, fit.variance)) per_lag.push_back(ax.axes);
    named.emplace_back("noise", std::move(per_lag));
  }

  std::string angles = "lag,a,b,index,angle,cosine\n";
  std::string contrib = "subspace,lag,channel,contribution\n";
  for (int l = 1; l <= fit.max_lag; ++l) {
    const auto li = static_cast<std::size_t>(l - 1);
    for (std::size_t i = 0; i < named.size(); ++i) {
      const Eigen::MatrixXd& c = named[i].second[li];
      const Eigen::VectorXd w = channel_contributions(c, c.rows() / 2);
      for (Eigen::Index j = 0; j < w.size(); ++j)
        contrib += named[i].first + "," + std::to_string(l) + "," + std::to_string(j + 1) + "," +
                   format_double(w(j)) + "\n";
      for (std::size_t k = i + 1; k < named.size(); ++k) {
        const Eigen::VectorXd th = principal_angles(c, named[k].second[li]);
        for (Eigen::Index q = 0; q < th.size(); ++q)
          angles += std::to_string(l) + "," + named[i].first + "," + named[k].first + "," +
                    std::to_string(q + 1) + "," + format_double(th(q)) + "," +
                    format_double(std::cos(th(q))) + "\n";
      }
    }
  }
  const fs::path out(a.out);
  write_text_file(out / "angles.csv", angles);
  write_text_file(out / "contributions.csv", contrib);
  return kOk;
}

// ---- reproduce --------------------------------------------------------------

struct ReproduceArgs {
  std::string name;
  std::size_t replications = 0;
  std::uint64_t seed = 1;
  std::string out = "reproduce_out";
  bool full = false;
};

int cmd_reproduce(const ReproduceArgs& a) {
  const auto settings = named_experiment(a.name, a.full);
  if (!settings) throw ExitError{kUsage, "unknown experiment '" + a.name + "'"};
  const std::size_t reps = a.replications ? a.replications : (a.full ? 50 : 10);
  ReplicationOptions opts;
  std::vector<SettingSummary> rows;
  json detail = json::array();
  for (std::size_t k = 0; k < settings->size(); ++k) {
    const auto& s = (*settings)[k];
    std::cerr << a.name << ": setting " << k + 1 << "/" << settings->size() << " (p=" << s.channels
              << ")\n";
    rows.push_back(run_setting(s, opts, reps, a.seed, k, [&](std::size_t done, std::size_t total) {
      std::cerr << "  replication " << done << "/" << total << "\n";
    }));
    for (const auto& r : rows.back().replications) {
      json outcomes = json::array();
      for (const auto& o : r.outcomes)
        outcomes.push_back({{"variant", std::string(variant_name(o.variant))},
                            {"error", o.error.empty() ? json(nullptr) : json(o.error)},
                            {"acc", o.acc ? json(*o.acc) : json(nullptr)},
                            {"ari", o.ari ? json(*o.ari) : json(nullptr)},
                            {"out", o.out ? json(*o.out) : json(nullptr)},
                            {"fuzziness", o.fuzziness},
                            {"alpha", o.alpha ? json(*o.alpha) : json(nullptr)},
                            {"lambda", o.lambda ? json(*o.lambda) : json(nullptr)},
                            {"flagged", o.flagged},
                            {"false_positives", o.false_positives}});
      detail.push_back({{"setting", k},
                        {"replication", r.replication},
                        {"seed", r.seed},
                        {"contaminated", r.contaminated},
                        {"outcomes", outcomes}});
    }
  }
  const fs::path out(a.out);
  const std::string csv = summary_csv(a.name, rows);
  write_text_file(out / "summary.csv", csv);
  Provenance prov;
  prov.config_hash = config_hash(
      {{"experiment", a.name}, {"replications", reps}, {"full", a.full}, {"seed", a.seed}});
  prov.dataset_hash = "generated";
  prov.seed = a.seed;
  json doc = envelope("reproduce", prov);
  doc["experiment"] = a.name;
  doc["replications"] = detail;
  write_json_file(out / "replications.json", doc);
  std::cout << csv;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust fuzzy CPCA clustering of multivariate time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic EEG benchmark dataset");
  simulate->add_option("-c,--config", sim.config, "JSON generator config")->required();
  simulate->add_option("-o,--out", sim.out, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Override the config seed");

  FitArgs fit;
  auto add_fit_options = [&](CLI::App* cmd) {
    cmd->add_option("-d,--data", fit.data, "Directory of trial CSVs")->required();
    cmd->add_option("-o,--out", fit.out, "Output JSON")->required();
    cmd->add_option("-c,--config", fit.config, "JSON fit config");
    cmd->add_option("-v,--variant", fit.variant, "fcpca | e | n | t");
    cmd->add_option("-S,--clusters", fit.clusters, "Number of regular clusters");
    cmd->add_option("-m,--fuzziness", fit.fuzziness, "Fuzziness exponent m > 1");
    cmd->add_option("--alpha", fit.alpha, "Trimming fraction (variant t)");
    cmd->add_option("--lambda", fit.lambda, "Noise multiplier or 'auto' (variant n)");
    cmd->add_option("--restarts", fit.restarts, "Restarts per grid tuple");
    cmd->add_option("--subspace-rule", fit.subspace_rule, "adaptive | descent");
    cmd->add_option("--seed", fit.seed, "Random seed");
  };
  auto* fitcmd = app.add_subcommand("fit", "Fit one variant, optionally with CVI selection");
  add_fit_options(fitcmd);
  fitcmd->add_flag("--auto", fit.automatic, "Select S, m (and alpha) by CVI");
  fitcmd->add_option("--memberships", fit.memberships, "Also write memberships CSV");
  auto* select = app.add_subcommand("select", "Run the CVI grid search and report every tuple");
  add_fit_options(select);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a fit against a simulation manifest");
  evaluate->add_option("-f,--fit", ev.fit, "Fit JSON")->required();
  evaluate->add_option("-m,--manifest", ev.manifest, "Manifest JSON")->required();
  evaluate->add_option("-o,--out", ev.out, "Output JSON")->required();
  evaluate->add_option("--per-object", ev.per_object, "Also write a per-object CSV");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Principal angles and channel contributions");
  analyze->add_option("-f,--fit", an.fit, "Fit JSON")->required();
  analyze->add_option("-d,--data", an.data, "Data directory (noise subspace for variant n)");
  analyze->add_option("-o,--out", an.out, "Output directory")->required();

  ReproduceArgs rep;
  auto* reproduce = app.add_subcommand("reproduce", "Re-run a benchmark table");
  reproduce->add_option("name", rep.name, "table1 | table4")->required();
  reproduce->add_option("-R,--replications", rep.replications,
                        "Replications per setting (default 10, or 50 with --full)");
  reproduce->add_option("--seed", rep.seed, "Base seed");
  reproduce->add_option("-o,--out", rep.out, "Output directory");
  reproduce->add_flag("--full", rep.full, "Add p = 128 and default to 50 replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*fitcmd) return cmd_fit(fit, false);
    if (*select) return cmd_fit(fit, true);
    if (*evaluate) return cmd_evaluate(ev);
    if (*analyze) return cmd_analyze(an);
    if (*reproduce) return cmd_reproduce(rep);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const int code = exit_for(e);
    return code == kFit ? kIo : code;  // data errors outside a fit are input problems
  }
  return kUsage;
}
