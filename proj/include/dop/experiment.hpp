// -*- mode: c++ -*-

#ifndef DOP_EXPERIMENT_HPP
#define DOP_EXPERIMENT_HPP

// Repeated split / train / parse / score runs and the summary report.

#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <dop/eval.hpp>
#include <dop/maxcons.hpp>
#include <dop/reduction.hpp>
#include <dop/transform.hpp>

namespace dop
{
  enum class SystemKind { Dop, Gold, External };

  struct SystemSpec
  {
    std::string                    name;
    SystemKind                     kind = SystemKind::Dop;
    std::vector<std::vector<Tree>> outputs;  // external only: candidate trees per run, in test-set order
  };

  struct ExperimentConfig
  {
    SplitConfig           split;
    BinarizationScheme    scheme       = BinarizationScheme::Correct;
    MatchMode             match        = MatchMode::Strict;
    CrossingOptions       crossing;
    ParseOptions          parse;
    bool                  words_to_pos = false;
    std::set<std::string> empty_markers = default_empty_markers();
  };

  struct SystemRuns
  {
    std::string             name;
    std::vector<RunMetrics> runs;
  };

  struct MetricRow
  {
    std::string         label;
    std::vector<double> values;  // one per run
    Summary             summary;
  };

  struct PairedTest
  {
    std::string          label;
    std::optional<TTest> test;  // empty when the differences have no variance
  };

  struct EvalReport
  {
    ExperimentConfig         config;
    std::size_t              corpus_size = 0;
    std::vector<std::size_t> train_sizes;  // per run, after the length filter
    std::vector<std::size_t> test_sizes;
    std::vector<SystemRuns>  systems;
    std::vector<MetricRow>   rows;
    std::vector<PairedTest>  tests;
  };

  inline const std::vector<std::string>& metric_names()
  {
    static const std::vector<std::string> names{"Cross Brack", "Zero Cross Brack", "Exact Match"};
    return names;
  }

  inline double metric_value(const RunMetrics& metrics, std::size_t metric)
  {
    switch (metric) {
    case 0: return metrics.crossing_rate();
    case 1: return metrics.zero_crossing_rate();
    default: return metrics.exact_match_rate();
    }
  }

  inline std::vector<Tree> prepare_corpus(const std::vector<Tree>& corpus, const ExperimentConfig& config)
  {
    PreprocessOptions options;
    options.scheme = config.scheme;
    options.retain_unary = false;  // the reduction has no unary nonterminal rules
    options.words_to_pos = config.words_to_pos;
    options.empty_markers = config.empty_markers;
    return preprocess(corpus, options);
  }

  inline EvalReport run_experiment(const std::vector<Tree>& corpus, const ExperimentConfig& config,
                                   const std::vector<SystemSpec>& systems)
  {
    if (systems.empty())
      throw Error(ErrorCode::Usage, "an experiment needs at least one system");
    const auto prepared = prepare_corpus(corpus, config);

    EvalReport report;
    report.config = config;
    report.corpus_size = prepared.size();
    for (const auto& system : systems) {
      if (system.kind == SystemKind::External && system.outputs.size() < config.split.runs)
        throw Error(ErrorCode::Usage, "system '" + system.name + "' has outputs for " + std::to_string(system.outputs.size())
                                          + " runs, experiment has " + std::to_string(config.split.runs));
      report.systems.push_back({system.name, {}});
    }

    for (std::size_t run = 0; run != config.split.runs; ++ run) {
      const auto split = random_split(prepared, config.split, run);
      if (split.test.empty())
        throw Error(ErrorCode::CorpusTooSmall, "run " + std::to_string(run) + " has no test sentences after the length filter");
      if (split.train.empty())
        throw Error(ErrorCode::CorpusTooSmall, "run " + std::to_string(run) + " has no training sentences after the length filter");
      report.train_sizes.push_back(split.train.size());
      report.test_sizes.push_back(split.test.size());

      std::optional<Pcfg> grammar;
      for (std::size_t k = 0; k != systems.size(); ++ k) {
        const auto& system = systems[k];
        RunMetrics metrics;
        if (system.kind == SystemKind::External && system.outputs[run].size() != split.test.size())
          throw Error(ErrorCode::YieldMismatch, "system '" + system.name + "' run " + std::to_string(run) + " has "
                                                    + std::to_string(system.outputs[run].size()) + " trees for "
                                                    + std::to_string(split.test.size()) + " test sentences");
        for (std::size_t i = 0; i != split.test.size(); ++ i) {
          const Tree& gold = split.test[i];
          Tree candidate;
          switch (system.kind) {
          case SystemKind::Dop: {
            if (! grammar)
              grammar = reduce(split.train);
            auto outcome = parse_sentence(*grammar, yield_of(gold), config.parse);
            metrics.fallbacks += outcome.method == ParseMethod::Fallback;
            candidate = std::move(outcome.tree);
            break;
          }
          case SystemKind::Gold:
            candidate = gold;
            break;
          case SystemKind::External:
            candidate = binarize(collapse_unary(system.outputs[run][i]), config.scheme);
            break;
          }
          metrics.add(candidate, gold, config.crossing, config.match);
        }
        report.systems[k].runs.push_back(metrics);
      }
    }

    // rows per metric: each system, then the paired differences against the first
    for (std::size_t metric = 0; metric != metric_names().size(); ++ metric) {
      const std::string& name = metric_names()[metric];
      std::vector<std::vector<double>> values;
      for (const auto& system : report.systems) {
        std::vector<double> row;
        for (const auto& metrics : system.runs)
          row.push_back(metric_value(metrics, metric));
        report.rows.push_back({name + " " + system.name, row, summarize(row)});
        values.push_back(std::move(row));
      }
      for (std::size_t k = 1; k < report.systems.size(); ++ k) {
        std::vector<double> deltas;
        for (std::size_t run = 0; run != values[0].size(); ++ run)
          deltas.push_back(values[0][run] - values[k][run]);
        const std::string label = name + " " + report.systems[0].name + "-" + report.systems[k].name;
        report.rows.push_back({label, deltas, summarize(deltas)});
        if (deltas.size() >= 2) {
          PairedTest test{label, std::nullopt};
          try {
            test.test = paired_t_test(deltas);
          } catch (const Error& error) {
            if (error.code() != ErrorCode::DegenerateVariance)
              throw;
          }
          report.tests.push_back(std::move(test));
        }
      }
    }
    return report;
  }

  // ------------------------------------------------------------------
  // formatting

  namespace detail
  {
    inline std::string fixed(double value, int digits)
    {
      char buffer[64];
      std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
      std::string out = buffer;
      if (out == "-0.00" || out == "-0.0000")
        out.erase(0, 1);
      return out;
    }

    inline std::string percent(double value) { return fixed(value, 2) + "%"; }

    inline std::string describe(const ExperimentConfig& config)
    {
      std::ostringstream os;
      os << "scheme=" << to_string(config.scheme)
         << " train=" << config.split.train
         << " test=" << config.split.test
         << " max_len=" << (config.split.max_length ? std::to_string(*config.split.max_length) : "none")
         << " runs=" << config.split.runs
         << " seed=" << config.split.seed
         << " match=" << to_string(config.match)
         << " count_root=" << (config.crossing.count_root ? "yes" : "no")
         << " count_single_words=" << (config.crossing.count_single_words ? "yes" : "no")
         << " fallback_punct=";
      bool first = true;
      for (const auto& p : config.parse.final_punctuation) {
        os << (first ? "" : ",") << p;
        first = false;
      }
      return os.str();
    }
  }

  // tab-separated, in the column layout Criteria / Min / Max / Range / Mean / StdDev
  inline std::string format_table(const EvalReport& report)
  {
    std::ostringstream os;
    os << "# dop experiment\n";
    os << "# " << detail::describe(report.config) << "\n";
    os << "# corpus=" << report.corpus_size << " systems=";
    for (std::size_t k = 0; k != report.systems.size(); ++ k)
      os << (k ? "," : "") << report.systems[k].name;
    os << "\n";
    os << "Criteria\tMin\tMax\tRange\tMean\tStdDev\n";
    for (const auto& row : report.rows)
      os << row.label << '\t' << detail::percent(row.summary.min) << '\t' << detail::percent(row.summary.max) << '\t'
         << detail::percent(row.summary.range) << '\t' << detail::percent(row.summary.mean) << '\t'
         << detail::percent(row.summary.stddev) << '\n';

    if (! report.tests.empty()) {
      os << "\n# paired t-tests over runs\n";
      os << "Comparison\tt\tdf\tp\tSignificance\n";
      for (const auto& test : report.tests) {
        if (test.test)
          os << test.label << '\t' << detail::fixed(test.test->t, 4) << '\t' << test.test->df << '\t'
             << detail::fixed(test.test->p, 4) << '\t' << detail::percent(100 * test.test->significance) << '\n';
        else
          os << test.label << "\tn/a\t" << report.test_sizes.size() - 1 << "\tn/a\tzero variance\n";
      }
    }

    os << "\n# per run\n";
    os << "Run\tSystem\tTrain\tTest\tCross Brack\tZero Cross Brack\tExact Match\tFallbacks\n";
    for (std::size_t run = 0; run != report.test_sizes.size(); ++ run)
      for (const auto& system : report.systems) {
        const auto& m = system.runs[run];
        os << run << '\t' << system.name << '\t' << report.train_sizes[run] << '\t' << report.test_sizes[run] << '\t'
           << detail::percent(m.crossing_rate()) << '\t' << detail::percent(m.zero_crossing_rate()) << '\t'
           << detail::percent(m.exact_match_rate()) << '\t' << m.fallbacks << '\n';
      }
    return os.str();
  }

  inline nlohmann::ordered_json to_json(const EvalReport& report)
  {
    using nlohmann::ordered_json;
    const auto& config = report.config;
    ordered_json out;
    out["config"] = {
      {"scheme", std::string(to_string(config.scheme))},
      {"train", config.split.train},
      {"test", config.split.test},
      {"max_len", config.split.max_length ? ordered_json(*config.split.max_length) : ordered_json(nullptr)},
      {"runs", config.split.runs},
      {"seed", config.split.seed},
      {"match", std::string(to_string(config.match))},
      {"count_root", config.crossing.count_root},
      {"count_single_words", config.crossing.count_single_words},
      {"fallback_punct", config.parse.final_punctuation},
    };
    out["corpus"] = report.corpus_size;
    out["train_sizes"] = report.train_sizes;
    out["test_sizes"] = report.test_sizes;

    ordered_json systems = ordered_json::array();
    for (const auto& system : report.systems) {
      ordered_json runs = ordered_json::array();
      for (const auto& m : system.runs)
        runs.push_back({
          {"sentences", m.sentences},
          {"constituents", m.constituents},
          {"crossing_constituents", m.crossing_constituents},
          {"zero_crossing_sentences", m.zero_crossing_sentences},
          {"exact_matches", m.exact_matches},
          {"fallbacks", m.fallbacks},
          {"cross_brack", m.crossing_rate()},
          {"zero_cross_brack", m.zero_crossing_rate()},
          {"exact_match", m.exact_match_rate()},
        });
      systems.push_back({{"name", system.name}, {"runs", runs}});
    }
    out["systems"] = systems;

    ordered_json rows = ordered_json::array();
    for (const auto& row : report.rows)
      rows.push_back({
        {"criteria", row.label},
        {"values", row.values},
        {"min", row.summary.min},
        {"max", row.summary.max},
        {"range", row.summary.range},
        {"mean", row.summary.mean},
        {"stddev", row.summary.stddev},
      });
    out["rows"] = rows;

    ordered_json tests = ordered_json::array();
    for (const auto& test : report.tests) {
      if (test.test)
        tests.push_back({{"comparison", test.label}, {"t", test.test->t}, {"df", test.test->df},
                         {"p", test.test->p}, {"significance", test.test->significance}});
      else
        tests.push_back({{"comparison", test.label}, {"t", nullptr}, {"note", "zero variance"}});
    }
    out["t_tests"] = tests;
    return out;
  }

  inline std::string format_structured(const EvalReport& report) { return to_json(report).dump(2) + "\n"; }
}

#endif
