#include "rfcpca/experiments.hpp"

#include "rfcpca/errors.hpp"
#include "rfcpca/io.hpp"
#include "rfcpca/rng.hpp"

#include <sstream>

namespace rfcpca {
namespace {

constexpr std::uint64_t kSelectTag = 0x53454C;  // "SEL"
constexpr std::uint64_t kElbowTag = 0x454C42;   // "ELB"

struct Mean {
  double sum = 0.0;
  std::size_t count = 0;
  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++count;
    }
  }
  std::optional<double> value() const {
    return count ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt;
  }
};

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

SimulatedData simulate_setting(const ExperimentSetting& setting, std::uint64_t seed) {
  CleanConfig clean;
  clean.per_group = setting.per_group;
  clean.channels = setting.channels;
  clean.length = setting.length;
  clean.length_range = setting.length_range;
  clean.dominance = setting.dominance;
  clean.split_exponent = setting.split_exponent;
  clean.seed = seed;
  SimulatedData sim = generate_clean_dataset(clean);
  switch (setting.contamination) {
    case Contamination::None: return sim;
    case Contamination::Burst: {
      BurstConfig b = setting.burst;
      b.seed = seed;
      return inject_bursts(sim, b);
    }
    case Contamination::EyeBlink: {
      BlinkConfig b = setting.blink;
      b.seed = seed;
      return inject_eyeblinks(sim, b);
    }
  }
  return sim;
}

ReplicationResult run_replication(const ExperimentSetting& setting,
                                  const ReplicationOptions& opts, std::uint64_t seed,
                                  std::size_t replication) {
  const SimulatedData sim = simulate_setting(setting, seed);
  const FeatureSet features = build_features(sim.data, 2);

  ReplicationResult res;
  res.replication = replication;
  res.seed = seed;
  res.contaminated = sim.manifest.contaminated;

  for (std::size_t v = 0; v < opts.variants.size(); ++v) {
    const Variant variant = opts.variants[v];
    VariantOutcome outcome;
    outcome.variant = variant;
    try {
      SearchOptions search = opts.search;
      if (variant == Variant::Noise) {
        FitOptions fo;
        fo.clusters = opts.clusters.front();
        fo.fuzziness = opts.elbow_fuzziness;
        fo.variance = search.variance;
        fo.max_iter = search.max_iter;
        fo.tol = search.tol;
        fo.subspace_rule = search.subspace_rule;
        fo.seed = derive_seed(seed, kElbowTag);
        const auto grid = default_lambda_grid(opts.lambda_halvings);
        search.noise.lambda =
            select_lambda_elbow(features, fo, grid, search.noise.schedule).lambda;
        outcome.lambda = search.noise.lambda;
      }
      SearchGrid grid;
      grid.variant = variant;
      grid.clusters = opts.clusters;
      grid.fuzziness = opts.fuzziness;
      grid.alphas = opts.alphas;
      const Selection sel =
          grid_search(features, grid, search, derive_seed(seed, kSelectTag, v));
      const EvalReport rep = evaluate_fit(sel.fit, sim.data.labels, sim.data.outliers);
      outcome.acc = rep.acc_rand;
      outcome.ari = rep.acc_adjusted_rand;
      outcome.out = rep.outlier_recall;
      outcome.fuzziness = sel.fit.fuzziness;
      outcome.alpha = sel.fit.alpha;
      outcome.flagged = rep.flagged.size();
      outcome.false_positives = rep.false_positives;
    } catch (const Error& e) {
      outcome.error = std::string(e.name());
    }
    res.outcomes.push_back(std::move(outcome));
  }
  return res;
}

std::vector<VariantSummary> summarize(const std::vector<ReplicationResult>& reps,
                                      const std::vector<Variant>& variants) {
  std::vector<VariantSummary> out;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    VariantSummary s;
    s.variant = variants[v];
    Mean acc, ari, recall, alpha, fuzz, lambda;
    for (const auto& r : reps) {
      const VariantOutcome& o = r.outcomes.at(v);
      ++s.runs;
      if (!o.error.empty()) {
        ++s.failures;
        continue;
      }
      acc.add(o.acc);
      ari.add(o.ari);
      recall.add(o.out);
      alpha.add(o.alpha);
      fuzz.add(o.fuzziness);
      lambda.add(o.lambda);
    }
    s.acc = acc.value();
    s.ari = ari.value();
    s.out = recall.value();
    s.alpha = alpha.value();
    s.fuzziness = fuzz.value();
    s.lambda = lambda.value();
    out.push_back(s);
  }
  return out;
}

SettingSummary run_setting(const ExperimentSetting& setting, const ReplicationOptions& opts,
                           std::size_t replications, std::uint64_t seed,
                           std::size_t setting_index, const ProgressFn& progress) {
  if (replications < 1) fail(ErrorCode::InvalidArgument, "need at least one replication");
  SettingSummary out;
  out.setting = setting;
  for (std::size_t r = 0; r < replications; ++r) {
    out.replications.push_back(
        run_replication(setting, opts, derive_seed(seed, setting_index, r), r));
    if (progress) progress(r + 1, replications);
  }
  out.variants = summarize(out.replications, opts.variants);
  return out;
}

std::optional<std::vector<ExperimentSetting>> named_experiment(const std::string& name,
                                                               bool full) {
  std::vector<Eigen::Index> channels{32, 64};
  if (full) channels.push_back(128);
  std::vector<ExperimentSetting> out;
  if (name == "table1") {
    for (Eigen::Index t : {400, 1000})
      for (Eigen::Index p : channels) {
        ExperimentSetting s;
        s.contamination = Contamination::Burst;
        s.channels = p;
        s.length = t;
        out.push_back(s);
      }
    return out;
  }
  if (name == "table4") {
    for (Eigen::Index p : channels) {
      ExperimentSetting s;
      s.contamination = Contamination::EyeBlink;
      s.channels = p;
      s.length_range = std::make_pair(Eigen::Index{400}, Eigen::Index{2000});
      out.push_back(s);
    }
    return out;
  }
  return std::nullopt;
}

std::string summary_csv(const std::string& experiment, const std::vector<SettingSummary>& rows) {
  std::ostringstream os;
  os << "experiment,contamination,p,T,replications,method,acc,ari,out,alpha,fuzziness,lambda,"
        "failures\n";
  for (const auto& row : rows) {
    const auto& s = row.setting;
    const std::string length =
        s.length_range ? std::to_string(s.length_range->first) + "-" +
                             std::to_string(s.length_range->second)
                       : std::to_string(s.length);
    for (const auto& v : row.variants)
      os << experiment << ',' << contamination_name(s.contamination) << ',' << s.channels << ','
         << length << ',' << v.runs << ',' << variant_name(v.variant) << ',' << cell(v.acc) << ','
         << cell(v.ari) << ',' << cell(v.out) << ',' << cell(v.alpha) << ','
         << cell(v.fuzziness) << ',' << cell(v.lambda) << ',' << v.failures << '\n';
  }
  return os.str();
}

}  // namespace rfcpca
