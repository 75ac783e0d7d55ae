// -*- mode: c++ -*-

#ifndef DOP_CLI_HPP
#define DOP_CLI_HPP

// The `dop` command line. Kept in a header so tests can drive it in-process
// with string streams.
//
// Exit codes: 0 success, 2 usage, 3 I/O, 4 data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <dop/chart.hpp>
#include <dop/eval.hpp>
#include <dop/experiment.hpp>
#include <dop/grammar.hpp>
#include <dop/maxcons.hpp>
#include <dop/reduction.hpp>
#include <dop/synthetic.hpp>
#include <dop/transform.hpp>
#include <dop/tree.hpp>

namespace dop::cli
{
  enum ExitCode : int { Ok = 0, UsageError = 2, IoError = 3, DataError = 4 };

  inline int exit_code(ErrorCode code)
  {
    switch (code) {
    case ErrorCode::Usage: return UsageError;
    case ErrorCode::Io:    return IoError;
    default:               return DataError;
    }
  }

  // ------------------------------------------------------------------
  // files

  inline std::string read_file(const std::string& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (! in)
      throw Error(ErrorCode::Io, "cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad())
      throw Error(ErrorCode::Io, "error reading '" + path + "'");
    return buffer.str();
  }

  // '#' lines are headers; a "<TAB># " suffix is a comment column
  inline std::string strip_comments(const std::string& text)
  {
    std::istringstream in(text);
    std::string out;
    for (std::string line; std::getline(in, line);) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first != std::string::npos && line[first] == '#')
        line.clear();
      else if (const auto comment = line.find("\t# "); comment != std::string::npos)
        line.erase(comment);
      out += line;
      out += '\n';
    }
    return out;
  }

  // the message without its "Code: " prefix
  inline std::string message_of(const Error& error)
  {
    const std::string what = error.what();
    const std::size_t prefix = to_string(error.code()).size() + 2;
    return what.size() >= prefix ? what.substr(prefix) : what;
  }

  inline std::vector<Tree> load_trees(const std::string& path, bool allow_reserved = false)
  {
    const std::string text = strip_comments(read_file(path));
    try {
      return read_penn(text, {.allow_reserved = allow_reserved});
    } catch (const Error& error) {
      throw Error(error.code(), path + ": " + message_of(error));
    }
  }

  inline std::vector<std::string> read_lines(const std::string& path)
  {
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
      if (! line.empty() && line.back() == '\r')
        line.pop_back();
      lines.push_back(line);
    }
    return lines;
  }

  inline Sentence split_words(const std::string& line)
  {
    std::istringstream in(line);
    Sentence words;
    for (std::string word; in >> word;)
      words.push_back(word);
    return words;
  }

  inline Pcfg load_grammar(const std::string& path)
  {
    std::istringstream in(read_file(path));
    try {
      return read_pcfg(in);
    } catch (const Error& error) {
      throw Error(error.code(), path + ": " + message_of(error));
    }
  }

  // writes to `path`, or to `fallback` when the path is empty or "-"
  class Output
  {
  public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
      if (path.empty() || path == "-")
        return;
      file_.open(path, std::ios::binary);
      if (! file_)
        throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
      stream_ = &file_;
    }

    std::ostream& stream() { return *stream_; }

    void close(const std::string& path)
    {
      stream_->flush();
      if (! *stream_)
        throw Error(ErrorCode::Io, "error writing '" + (path.empty() ? std::string("-") : path) + "'");
    }

  private:
    std::ofstream file_;
    std::ostream* stream_;
  };

  inline std::set<std::string> parse_set(const std::string& text)
  {
    std::set<std::string> out;
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');)
      if (! item.empty())
        out.insert(item);
    return out;
  }

  inline std::string join(const std::set<std::string>& items)
  {
    std::string out;
    for (const auto& item : items)
      out += (out.empty() ? "" : ",") + item;
    return out;
  }

  // ------------------------------------------------------------------
  // options shared by several subcommands

  struct Options
  {
    // inputs and outputs
    std::string treebank;
    std::string grammar;
    std::string sentences;
    std::string output;

    std::string scheme = "correct";
    bool        words_to_pos = false;
    bool        retain_unary = false;

    // parse
    std::string                  method = "maxcons";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t>   samples;
    std::string                  fallback_punct = join(default_final_punctuation());
    bool                         binarized = false;

    // experiment
    std::size_t              train = 700;
    std::size_t              test = 88;
    std::size_t              max_len = 30;  // 0 disables the filter
    std::size_t              runs = 10;
    std::string              report = "table";
    bool                     loose_match = false;
    bool                     count_root = false;
    bool                     count_single_words = false;
    bool                     gold = false;
    bool                     no_dop = false;
    std::vector<std::string> external;
    std::string              dump_splits;

    // coverage
    std::size_t test_size = 75;
    bool        hypergeometric = false;
    bool        all_schemes = false;

    // generate
    std::size_t count = 200;
    std::size_t min_length = 2;
    std::size_t max_length = 40;
  };

  inline std::uint64_t seed_or_zero(const Options& options) { return options.seed.value_or(0); }

  inline std::vector<Tree> load_preprocessed(const Options& options)
  {
    PreprocessOptions pre;
    pre.scheme = parse_scheme(options.scheme);
    pre.words_to_pos = options.words_to_pos;
    return preprocess(load_trees(options.treebank), pre);
  }

  // ------------------------------------------------------------------
  // subcommands

  inline int cmd_reduce(const Options& options, std::ostream& out, std::ostream& err)
  {
    const auto corpus = load_preprocessed(options);
    if (corpus.empty())
      throw Error(ErrorCode::EmptyCorpus, options.treebank + ": no trees");
    const Pcfg grammar = reduce(corpus);
    const auto stats = grammar_stats(grammar);

    std::ostringstream summary;
    summary << "# dop reduce scheme=" << options.scheme << " words_to_pos=" << (options.words_to_pos ? "yes" : "no")
            << " trees=" << corpus.size() << "\n";
    char ratio[32];
    std::snprintf(ratio, sizeof(ratio), "%.4f", stats.rules_per_node);
    summary << "# nodes=" << stats.nodes << " rules=" << stats.rules << " exterior=" << stats.exterior_nonterminals
            << " interior=" << stats.interior_nonterminals << " terminals=" << stats.terminals
            << " rules_per_node=" << ratio << "\n";

    Output target(options.output, out);
    target.stream() << summary.str();
    write_pcfg(target.stream(), grammar);
    target.close(options.output);
    if (! options.output.empty() && options.output != "-")
      err << summary.str();
    return Ok;
  }

  inline int cmd_parse(const Options& options, std::ostream& out, std::ostream& err)
  {
    const bool monte_carlo = options.method == "montecarlo";
    if (monte_carlo && ! options.seed)
      throw Error(ErrorCode::Usage, "--method montecarlo requires --seed");
    if (monte_carlo && ! options.samples)
      throw Error(ErrorCode::Usage, "--method montecarlo requires --samples");
    if (monte_carlo && *options.samples == 0)
      throw Error(ErrorCode::Usage, "--samples must be at least 1");

    const Pcfg grammar = load_grammar(options.grammar);
    const auto lines = read_lines(options.sentences);
    ParseOptions parse_options;
    parse_options.final_punctuation = parse_set(options.fallback_punct);

    Output target(options.output, out);
    auto& os = target.stream();
    os << "# dop parse method=" << options.method;
    if (monte_carlo)
      os << " samples=" << *options.samples << " seed=" << *options.seed;
    os << " fallback_punct=" << join(parse_options.final_punctuation) << "\n";

    std::size_t failures = 0;
    for (std::size_t i = 0; i != lines.size(); ++ i) {
      const Sentence sentence = split_words(lines[i]);
      try {
        if (sentence.empty())
          throw Error(ErrorCode::ZeroLength, "empty sentence");
        Tree tree;
        bool fallback = false;
        if (options.method == "maxcons") {
          auto outcome = parse_sentence(grammar, sentence, parse_options);
          tree = std::move(outcome.tree);
          fallback = outcome.method == ParseMethod::Fallback;
        } else {
          const auto e = inside(grammar, sentence);
          if (! e.parsable()) {
            tree = fallback_parse(sentence, parse_options.final_punctuation);
            fallback = true;
          } else if (monte_carlo) {
            // one stream per line, so a line's parse does not depend on the lines before it
            tree = monte_carlo_parse(sample_derivations(grammar, sentence, e, *options.samples, *options.seed + i));
          } else {
            tree = erase_interior(viterbi_derivation(grammar, sentence).tree);
          }
        }
        if (! options.binarized)
          tree = strip_introduced(tree);
        os << write_penn(tree);
        if (fallback)
          os << "\t# fallback";
        os << "\n";
      } catch (const Error& error) {
        ++ failures;
        os << "\t# error " << error.what() << "\n";
        err << options.sentences << ":" << i + 1 << ": " << error.what() << "\n";
      }
    }
    target.close(options.output);
    return failures ? DataError : Ok;
  }

  inline int cmd_sample(const Options& options, std::ostream& out, std::ostream& err)
  {
    if (! options.seed)
      throw Error(ErrorCode::Usage, "sample requires --seed");
    const std::size_t count = options.samples.value_or(10);
    const Pcfg grammar = load_grammar(options.grammar);
    const auto lines = read_lines(options.sentences);

    Output target(options.output, out);
    auto& os = target.stream();
    os << "# dop sample samples=" << count << " seed=" << *options.seed << "\n";
    std::size_t failures = 0;
    for (std::size_t i = 0; i != lines.size(); ++ i) {
      const Sentence sentence = split_words(lines[i]);
      os << "# sentence " << i + 1 << "\n";
      try {
        if (sentence.empty())
          throw Error(ErrorCode::ZeroLength, "empty sentence");
        const auto e = inside(grammar, sentence);
        for (const auto& tree : sample_derivations(grammar, sentence, e, count, *options.seed + i))
          os << write_penn(options.binarized ? tree : strip_introduced(tree)) << "\n";
      } catch (const Error& error) {
        ++ failures;
        os << "# error " << error.what() << "\n";
        err << options.sentences << ":" << i + 1 << ": " << error.what() << "\n";
      }
    }
    target.close(options.output);
    return failures ? DataError : Ok;
  }

  inline ExperimentConfig experiment_config(const Options& options)
  {
    ExperimentConfig config;
    config.split.train = options.train;
    config.split.test = options.test;
    config.split.max_length = options.max_len ? std::optional<std::size_t>(options.max_len) : std::nullopt;
    config.split.runs = options.runs;
    config.split.seed = seed_or_zero(options);
    config.scheme = parse_scheme(options.scheme);
    config.match = options.loose_match ? MatchMode::Loose : MatchMode::Strict;
    config.crossing.count_root = options.count_root;
    config.crossing.count_single_words = options.count_single_words;
    config.parse.final_punctuation = parse_set(options.fallback_punct);
    config.words_to_pos = options.words_to_pos;
    return config;
  }

  // NAME=PATTERN, where {run} in the pattern expands to the run index
  inline SystemSpec external_system(const std::string& argument, std::size_t runs)
  {
    const auto equals = argument.find('=');
    if (equals == std::string::npos || equals == 0 || equals + 1 == argument.size())
      throw Error(ErrorCode::Usage, "--external expects NAME=PATTERN, got '" + argument + "'");
    SystemSpec system{argument.substr(0, equals), SystemKind::External, {}};
    const std::string pattern = argument.substr(equals + 1);
    for (std::size_t run = 0; run != runs; ++ run) {
      std::string path = pattern;
      for (std::size_t at; (at = path.find("{run}")) != std::string::npos;)
        path.replace(at, 5, std::to_string(run));
      system.outputs.push_back(load_trees(path, true));
    }
    return system;
  }

  inline void dump_splits(const std::vector<Tree>& corpus, const ExperimentConfig& config, const std::string& directory)
  {
    std::error_code ignored;
    std::filesystem::create_directories(directory, ignored);
    const auto prepared = prepare_corpus(corpus, config);
    for (std::size_t run = 0; run != config.split.runs; ++ run) {
      const auto split = random_split(prepared, config.split, run);
      const std::string stem = directory + "/run" + std::to_string(run);
      auto write = [](const std::string& path, auto&& body) {
        std::ofstream file(path, std::ios::binary);
        if (! file)
          throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
        body(file);
        if (! file)
          throw Error(ErrorCode::Io, "error writing '" + path + "'");
      };
      // debinarized, so the files read back as ordinary treebanks
      auto trees = [](const std::vector<Tree>& set) {
        return [&set](std::ostream& os) {
          for (const auto& t : set)
            os << write_penn(strip_introduced(t)) << "\n";
        };
      };
      write(stem + ".train.mrg", trees(split.train));
      write(stem + ".test.mrg", trees(split.test));
      write(stem + ".test.txt", [&](std::ostream& os) {
        for (const auto& t : split.test) {
          const auto words = yield_of(t);
          for (std::size_t i = 0; i != words.size(); ++ i)
            os << (i ? " " : "") << words[i];
          os << "\n";
        }
      });
    }
  }

  inline int cmd_experiment(const Options& options, std::ostream& out, std::ostream&)
  {
    if (options.report != "table" && options.report != "structured")
      throw Error(ErrorCode::Usage, "--report must be table or structured");
    const auto corpus = load_trees(options.treebank);
    if (corpus.empty())
      throw Error(ErrorCode::EmptyCorpus, options.treebank + ": no trees");
    const auto config = experiment_config(options);

    std::vector<SystemSpec> systems;
    if (! options.no_dop)
      systems.push_back({"DOP", SystemKind::Dop, {}});
    for (const auto& argument : options.external)
      systems.push_back(external_system(argument, config.split.runs));
    if (options.gold)
      systems.push_back({"Gold", SystemKind::Gold, {}});

    if (! options.dump_splits.empty())
      dump_splits(corpus, config, options.dump_splits);

    const auto report = run_experiment(corpus, config, systems);
    Output target(options.output, out);
    target.stream() << (options.report == "table" ? format_table(report) : format_structured(report));
    target.close(options.output);
    return Ok;
  }

  inline int cmd_coverage(const Options& options, std::ostream& out, std::ostream&)
  {
    const auto corpus = load_trees(options.treebank);
    std::vector<BinarizationScheme> schemes;
    if (options.all_schemes)
      schemes = {BinarizationScheme::Correct, BinarizationScheme::Continued, BinarizationScheme::Simple};
    else
      schemes = {parse_scheme(options.scheme)};

    Output target(options.output, out);
    auto& os = target.stream();
    os << "# dop coverage test_size=" << options.test_size
       << " formula=" << (options.hypergeometric ? "hypergeometric" : "binomial")
       << " unary=" << (options.retain_unary ? "retained" : "collapsed") << "\n";
    os << "Scheme\tSentences\tUnique\tp\tProbOne\n";
    for (auto scheme : schemes) {
      CoverageOptions coverage;
      coverage.scheme = scheme;
      coverage.retain_unary = options.retain_unary;
      coverage.test_size = options.test_size;
      coverage.hypergeometric = options.hypergeometric;
      const auto result = coverage_analysis(corpus, coverage);
      char p[32], prob[32];
      std::snprintf(p, sizeof(p), "%.4f", result.p);
      std::snprintf(prob, sizeof(prob), "%.3e", result.prob_one);
      os << to_string(scheme) << '\t' << result.sentences << '\t' << result.unique_sentences << '\t' << p << '\t' << prob
         << '\n';
    }
    target.close(options.output);
    return Ok;
  }

  inline int cmd_generate(const Options& options, std::ostream& out, std::ostream&)
  {
    SyntheticOptions synthetic;
    synthetic.min_length = options.min_length;
    synthetic.max_length = options.max_length;
    if (synthetic.min_length > synthetic.max_length || synthetic.min_length < 1)
      throw Error(ErrorCode::Usage, "need 1 <= --min-length <= --max-length");
    Output target(options.output, out);
    auto& os = target.stream();
    os << "# dop generate count=" << options.count << " seed=" << seed_or_zero(options) << " min_length="
       << synthetic.min_length << " max_length=" << synthetic.max_length << "\n";
    for (const auto& tree : synthetic_treebank(options.count, seed_or_zero(options), synthetic))
      os << write_penn(tree) << "\n";
    target.close(options.output);
    return Ok;
  }

  // ------------------------------------------------------------------

  inline int run(const std::vector<std::string>& arguments, std::ostream& out, std::ostream& err)
  {
    CLI::App app{"Data-oriented parsing through an equivalent PCFG", "dop"};
    app.require_subcommand(1);
    Options options;

    const std::vector<std::string> scheme_names{"correct", "continued", "simple"};
    auto add_scheme = [&](CLI::App* command) {
      command->add_option("--scheme", options.scheme, "binarization scheme")->check(CLI::IsMember(scheme_names));
    };
    auto add_output = [&](CLI::App* command) { command->add_option("-o,--output", options.output, "output path (default stdout)"); };
    auto add_seed = [&](CLI::App* command) { command->add_option("--seed", options.seed, "random seed"); };
    auto add_punct = [&](CLI::App* command) {
      command->add_option("--fallback-punct", options.fallback_punct, "comma-separated final punctuation for fallback trees");
    };

    auto* reduce_cmd = app.add_subcommand("reduce", "build the PCFG equivalent to the DOP model of a treebank");
    reduce_cmd->add_option("treebank", options.treebank, "Penn-bracketed treebank")->required();
    add_scheme(reduce_cmd);
    add_output(reduce_cmd);
    reduce_cmd->add_flag("--words-to-pos", options.words_to_pos, "replace words by their preterminal tags");

    auto* parse_cmd = app.add_subcommand("parse", "parse sentences, one per line");
    parse_cmd->add_option("grammar", options.grammar, "grammar file written by reduce")->required();
    parse_cmd->add_option("sentences", options.sentences, "one whitespace-separated sentence per line")->required();
    parse_cmd->add_option("--method", options.method, "decoder")
      ->check(CLI::IsMember({"maxcons", "viterbi", "montecarlo"}));
    parse_cmd->add_option("--samples", options.samples, "samples per sentence (montecarlo)");
    add_seed(parse_cmd);
    add_punct(parse_cmd);
    add_output(parse_cmd);
    parse_cmd->add_flag("--binarized", options.binarized, "keep the symbols introduced by binarization");

    auto* sample_cmd = app.add_subcommand("sample", "draw derivations conditioned on each sentence");
    sample_cmd->add_option("grammar", options.grammar)->required();
    sample_cmd->add_option("sentences", options.sentences)->required();
    sample_cmd->add_option("--samples", options.samples, "samples per sentence (default 10)");
    add_seed(sample_cmd);
    add_output(sample_cmd);
    sample_cmd->add_flag("--binarized", options.binarized);

    auto* experiment_cmd = app.add_subcommand("experiment", "repeated split / train / parse / score runs");
    experiment_cmd->add_option("treebank", options.treebank)->required();
    add_scheme(experiment_cmd);
    add_seed(experiment_cmd);
    add_punct(experiment_cmd);
    add_output(experiment_cmd);
    experiment_cmd->add_option("--train", options.train, "training sentences per run")->capture_default_str();
    experiment_cmd->add_option("--test", options.test, "test sentences per run")->capture_default_str();
    experiment_cmd->add_option("--max-len", options.max_len, "drop longer sentences after splitting (0: no limit)")
      ->capture_default_str();
    experiment_cmd->add_option("--runs", options.runs)->capture_default_str()->check(CLI::PositiveNumber);
    experiment_cmd->add_option("--report", options.report)->check(CLI::IsMember({"table", "structured"}));
    experiment_cmd->add_flag("--loose-match", options.loose_match, "exact match ignores binarization symbols");
    experiment_cmd->add_flag("--count-root", options.count_root, "count the root span in crossing brackets");
    experiment_cmd->add_flag("--count-single-words", options.count_single_words, "count length-1 spans in crossing brackets");
    experiment_cmd->add_flag("--gold", options.gold, "add the gold-copy oracle system");
    experiment_cmd->add_flag("--no-dop", options.no_dop, "leave out the DOP system");
    experiment_cmd->add_option("--external", options.external, "NAME=PATTERN candidate trees per run, {run} expands to the index");
    experiment_cmd->add_option("--dump-splits", options.dump_splits, "write each run's train/test sets into this directory");
    experiment_cmd->add_flag("--words-to-pos", options.words_to_pos);

    auto* coverage_cmd = app.add_subcommand("coverage", "probability of sentences with unique productions");
    coverage_cmd->add_option("treebank", options.treebank)->required();
    add_scheme(coverage_cmd);
    add_output(coverage_cmd);
    coverage_cmd->add_flag("--all-schemes", options.all_schemes, "one row per binarization scheme");
    coverage_cmd->add_flag("--retain-unary", options.retain_unary, "keep unary chains when counting productions");
    coverage_cmd->add_option("--test-size", options.test_size)->capture_default_str();
    coverage_cmd->add_flag("--hypergeometric", options.hypergeometric, "sample the test set without replacement");

    auto* generate_cmd = app.add_subcommand("generate", "write a seeded synthetic treebank");
    generate_cmd->add_option("--count", options.count)->capture_default_str();
    generate_cmd->add_option("--min-length", options.min_length)->capture_default_str();
    generate_cmd->add_option("--max-length", options.max_length)->capture_default_str();
    add_seed(generate_cmd);
    add_output(generate_cmd);

    std::vector<std::string> reversed(arguments.rbegin(), arguments.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& error) {
      const int code = app.exit(error, out, err);
      return code == 0 ? Ok : UsageError;
    }

    try {
      if (*reduce_cmd)
        return cmd_reduce(options, out, err);
      if (*parse_cmd)
        return cmd_parse(options, out, err);
      if (*sample_cmd)
        return cmd_sample(options, out, err);
      if (*experiment_cmd)
        return cmd_experiment(options, out, err);
      if (*coverage_cmd)
        return cmd_coverage(options, out, err);
      return cmd_generate(options, out, err);
    } catch (const Error& error) {
      err << "dop: " << error.what() << "\n";
      return exit_code(error.code());
    }
  }

  inline int main(int argc, char** argv)
  {
    std::vector<std::string> arguments(argv + 1, argv + argc);
    return run(arguments, std::cout, std::cerr);
  }
}

#endif
