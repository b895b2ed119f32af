#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "kgsynth/kgsynth.hpp"

namespace kgsynth::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInfeasible = 3, kInternal = 4 };

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Flat key<TAB>value record of one invocation.
struct RunManifest {
  std::string command;
  std::string input;
  std::string output;
  std::vector<std::pair<std::string, std::string>> params;
  std::string seed;
  std::string start_time;
  std::string end_time;
  std::string status;

  std::string format() const {
    std::string out;
    auto row = [&](std::string_view k, std::string_view v) { out.append(k).append("\t").append(v).append("\n"); };
    row("command", command);
    row("input", input);
    row("output", output);
    for (const auto& [k, v] : params) row("param." + k, v);
    row("seed", seed);
    row("version", kVersion);
    row("start_time", start_time);
    row("end_time", end_time);
    row("status", status);
    return out;
  }
};

struct Options {
  std::string input;
  std::string output;
  std::string recipe;
  std::string targets;
  std::string predictions;
  std::string variants;
  std::string format = "kgbert";
  std::string norm = "l1";
  std::string split = "test";
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::size_t dim = 100;
  std::size_t epochs = 100;
  std::size_t negatives = 1;
  double margin = 1.0;
  double learning_rate = 0.01;
  bool raw = false;
  bool filtered = false;
  bool dump_unigram = false;
  bool split_name_gloss = false;
};

inline Split parse_split(std::string_view s) {
  for (Split sp : kAllSplits)
    if (s == split_name(sp)) return sp;
  throw ValidationError("split must be train, valid or test");
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Reads "label<TAB>label..." header then numeric rows.
inline std::vector<NamedSeries> read_series_table(const std::filesystem::path& path) {
  std::vector<NamedSeries> series;
  tsv::for_each_line(tsv::read_file(path), [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    const auto fields = tsv::split(line, '\t');
    if (series.empty()) {
      for (auto f : fields) series.push_back({std::string(f), {}});
      return;
    }
    if (fields.size() != series.size())
      throw ValidationError(path.filename().string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(series.size()) + " columns");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      try {
        series[i].values.push_back(std::stod(std::string(fields[i])));
      } catch (const std::logic_error&) {
        throw ValidationError(path.filename().string() + ":" + std::to_string(line_no) + ": not a number '" +
                              std::string(fields[i]) + "'");
      }
    }
  });
  if (series.empty()) throw ValidationError(path.string() + ": empty table");
  return series;
}

// One value per line, optionally preceded by a label column.
inline std::vector<std::pair<std::string, double>> read_values(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, double>> values;
  tsv::for_each_line(tsv::read_file(path), [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    const auto tab = line.rfind('\t');
    const std::string label = tab == std::string_view::npos ? std::to_string(values.size()) : std::string(line.substr(0, tab));
    const std::string number(tab == std::string_view::npos ? line : line.substr(tab + 1));
    try {
      values.emplace_back(label, std::stod(number));
    } catch (const std::logic_error&) {
      throw ValidationError(path.filename().string() + ":" + std::to_string(line_no) + ": not a number '" + number +
                            "'");
    }
  });
  return values;
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Knowledge-graph benchmark perturbation toolkit", "kgsynth"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1, 1);
    Options o;

    auto input = [&](CLI::App* sub, std::string_view what = "dataset directory") {
      sub->add_option("--input,-i", o.input, std::string(what))->required();
    };
    auto threads = [&](CLI::App* sub) {
      sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    };

    auto* transform = app.add_subcommand("transform", "apply one recipe to a dataset");
    input(transform);
    transform->add_option("--output,-o", o.output, "variant directory")->required();
    transform->add_option("--recipe", o.recipe, "virtual-world | anonymized-entities | inconsistent-descriptions | fully-anonymized")
        ->required();
    transform->add_option("--targets", o.targets, "comma list of entities, relations, descriptions")->required();
    transform->add_option("--seed", o.seed, "random seed");
    transform->add_flag("--dump-unigram", o.dump_unigram, "also write the fitted unigram model");
    threads(transform);

    auto* suite = app.add_subcommand("suite", "generate the 13 benchmark variants");
    input(suite);
    suite->add_option("--output,-o", o.output, "suite directory")->required();
    suite->add_option("--seed", o.seed, "random seed");
    suite->add_option("--variants", o.variants, "comma list of labels (default: all)");
    threads(suite);

    auto* stats = app.add_subcommand("stats", "entity / relation / split counts");
    input(stats);
    stats->add_option("--output,-o", o.output, "report directory");

    auto* rel = app.add_subcommand("relation-dist", "entities by number of distinct relations");
    input(rel);
    rel->add_option("--output,-o", o.output, "report directory");

    auto* leak = app.add_subcommand("leakage", "answer names found in query descriptions");
    input(leak);
    leak->add_option("--output,-o", o.output, "report directory");

    auto* train_cmd = app.add_subcommand("train-baseline", "train and evaluate TransE");
    input(train_cmd);
    train_cmd->add_option("--output,-o", o.output, "checkpoint directory")->required();
    train_cmd->add_option("--dim", o.dim, "embedding dimension");
    train_cmd->add_option("--margin", o.margin, "ranking margin");
    train_cmd->add_option("--norm", o.norm, "l1 or l2");
    train_cmd->add_option("--lr", o.learning_rate, "learning rate");
    train_cmd->add_option("--epochs", o.epochs, "training epochs");
    train_cmd->add_option("--negatives", o.negatives, "negatives per positive");
    train_cmd->add_option("--seed", o.seed, "random seed");
    train_cmd->add_option("--split", o.split, "split to evaluate");
    train_cmd->add_flag("--raw", o.raw, "unfiltered ranking");
    threads(train_cmd);

    auto* eval_cmd = app.add_subcommand("evaluate", "score an external predictions file");
    input(eval_cmd);
    eval_cmd->add_option("--predictions,-p", o.predictions, "ranked candidates file")->required();
    auto* f_filtered = eval_cmd->add_flag("--filtered", o.filtered, "filtered ranking (default)");
    eval_cmd->add_flag("--raw", o.raw, "unfiltered ranking")->excludes(f_filtered);
    eval_cmd->add_option("--output,-o", o.output, "report directory");

    auto* corr = app.add_subcommand("correlate", "Pearson correlation matrix of table columns");
    input(corr, "TSV table with a header row");
    corr->add_option("--output,-o", o.output, "report directory");

    auto* outl = app.add_subcommand("outliers", "IQR outliers of a value list");
    input(outl, "values file (value or label<TAB>value per line)");
    outl->add_option("--output,-o", o.output, "report directory");

    auto* conv = app.add_subcommand("convert", "convert a public dataset layout");
    input(conv, "source directory");
    conv->add_option("--output,-o", o.output, "dataset directory")->required();
    conv->add_option("--format", o.format, "kgbert | wordnet | wikidata5m");
    conv->add_flag("--split-name-gloss", o.split_name_gloss, "split 'name, gloss' entity texts");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? kOk : kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    manifest_.command = sub->get_name();
    manifest_.input = o.input;
    manifest_.output = o.output;
    manifest_.start_time = utc_timestamp();
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
      const auto& name = opt->get_lnames()[0];
      if (name == "input" || name == "output" || name == "seed") continue;
      const auto results = opt->reduced_results();
      std::string value = results.empty() ? opt->get_default_str() : tsv::join(results, ",");
      if (value.empty() && opt->get_expected_min() == 0) value = opt->count() ? "true" : "false";
      manifest_.params.emplace_back(name, value);
    }
    if (sub->get_option_no_throw("--seed")) manifest_.seed = std::to_string(o.seed);

    int code = kOk;
    try {
      const std::string& name = manifest_.command;
      if (name == "transform") code = cmd_transform(o);
      else if (name == "suite") code = cmd_suite(o);
      else if (name == "stats") code = cmd_stats(o);
      else if (name == "relation-dist") code = cmd_relation_dist(o);
      else if (name == "leakage") code = cmd_leakage(o);
      else if (name == "train-baseline") code = cmd_train(o);
      else if (name == "evaluate") code = cmd_evaluate(o);
      else if (name == "correlate") code = cmd_correlate(o);
      else if (name == "outliers") code = cmd_outliers(o);
      else if (name == "convert") code = cmd_convert(o);
    } catch (const InfeasibleError& e) {
      code = fail(kInfeasible, "infeasible", e.what());
    } catch (const SamplingError& e) {
      code = fail(kInfeasible, "sampling failed", e.what());
    } catch (const IoError& e) {
      code = fail(kData, "i/o error", e.what());
    } catch (const ValidationError& e) {
      code = fail(kData, "invalid data", e.what());
    } catch (const std::exception& e) {
      code = fail(kInternal, "internal error", e.what());
    }
    manifest_.end_time = utc_timestamp();
    manifest_.status = std::to_string(code);
    emit_manifest();
    return code;
  }

 private:
  int fail(int code, std::string_view kind, std::string_view what) {
    err_ << "kgsynth " << manifest_.command << ": " << kind << ": " << what << "\n";
    return code;
  }

  // Written next to the outputs when there is an output directory,
  // otherwise to stderr.
  void emit_manifest() {
    const std::string text = manifest_.format();
    if (!manifest_.output.empty()) {
      try {
        std::filesystem::create_directories(manifest_.output);
        tsv::write_file(std::filesystem::path(manifest_.output) / "manifest.tsv", text);
        return;
      } catch (const std::exception& e) {
        err_ << "kgsynth: cannot write manifest: " << e.what() << "\n";
      }
    }
    err_ << text;
  }

  void report(const Options& o, std::string_view file, const std::string& text) {
    out_ << text;
    if (o.output.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(o.output, ec);
    if (ec) throw IoError("cannot create directory " + o.output);
    tsv::write_file(std::filesystem::path(o.output) / file, text);
  }

  int cmd_transform(const Options& o) {
    const auto kg = load_dataset(o.input);
    const TransformRecipe recipe{parse_kind(o.recipe), parse_targets(o.targets), o.seed};
    recipe.validate();
    const auto result = apply_recipe(kg, recipe, o.threads);
    write_variant(kg, result, o.output);
    if (o.dump_unigram)
      tsv::write_file(std::filesystem::path(o.output) / "unigram.tsv",
                      format_unigram(fit_unigram(detail::name_corpus(kg))));
    out_ << "wrote " << o.output << "\n";
    return kOk;
  }

  int cmd_suite(const Options& o) {
    const auto kg = load_dataset(o.input);
    auto variants = default_suite(o.seed);
    if (!o.variants.empty()) {
      std::vector<VariantSpec> chosen;
      for (auto label : tsv::split(o.variants, ',')) {
        auto it = std::find_if(variants.begin(), variants.end(), [&](const auto& v) { return v.label == label; });
        if (it == variants.end()) throw ValidationError("unknown variant label '" + std::string(label) + "'");
        chosen.push_back(*it);
      }
      variants = std::move(chosen);
    }
    const auto outcomes = generate_suite(kg, o.output, variants, o.seed, o.threads);
    int code = kOk;
    for (const auto& v : outcomes) {
      out_ << v.label << "\t" << (v.ok ? "ok" : "failed") << "\n";
      if (v.ok) continue;
      err_ << "kgsynth suite: " << v.label << ": " << v.error << "\n";
      const int c = v.failure == FailureKind::infeasible ? kInfeasible
                    : v.failure == FailureKind::data      ? kData
                                                          : kInternal;
      code = std::max(code, c);
    }
    return code;
  }

  int cmd_stats(const Options& o) {
    const auto s = compute_stats(load_dataset(o.input));
    std::ostringstream text;
    text << "entities\t" << s.n_entities << "\nrelations\t" << s.n_relations << "\ntrain\t" << s.n_train
         << "\nvalid\t" << s.n_valid << "\ntest\t" << s.n_test << "\n";
    report(o, "stats.tsv", text.str());
    return kOk;
  }

  int cmd_relation_dist(const Options& o) {
    report(o, "relation_dist.tsv", format_relation_table(relation_distribution(load_dataset(o.input))));
    return kOk;
  }

  int cmd_leakage(const Options& o) {
    report(o, "leakage.tsv", format_leakage_table(description_leakage(load_dataset(o.input))));
    return kOk;
  }

  int cmd_train(const Options& o) {
    const auto kg = load_dataset(o.input);
    TrainConfig cfg;
    cfg.dim = o.dim;
    cfg.margin = o.margin;
    cfg.norm = parse_norm(o.norm);
    cfg.learning_rate = o.learning_rate;
    cfg.epochs = o.epochs;
    cfg.negatives_per_positive = o.negatives;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    const Split split = parse_split(o.split);
    const auto model = train(kg, cfg);
    write_checkpoint(model, kg, o.output, &cfg);
    const auto metrics = evaluate_model(model, kg, split, !o.raw, resolve_threads(o.threads));
    report(o, "metrics.tsv", "split\t" + std::string(split_name(split)) + "\n" + format_metrics(metrics));
    return kOk;
  }

  int cmd_evaluate(const Options& o) {
    const auto kg = load_dataset(o.input);
    report(o, "metrics.tsv", format_metrics(evaluate_predictions_file(kg, o.predictions, !o.raw)));
    return kOk;
  }

  int cmd_correlate(const Options& o) {
    report(o, "correlation.tsv", format_correlation(pearson_matrix(read_series_table(o.input))));
    return kOk;
  }

  int cmd_outliers(const Options& o) {
    const auto values = read_values(o.input);
    std::vector<double> v;
    for (const auto& [label, x] : values) v.push_back(x);
    const auto r = iqr_outliers(v);
    std::string text = "convention\t" + std::string(kQuartileConvention) + "\nq1\t" + fmt_double(r.q1) + "\nq3\t" +
                       fmt_double(r.q3) + "\niqr\t" + fmt_double(r.iqr) + "\nlower_fence\t" +
                       fmt_double(r.lower_fence) + "\nupper_fence\t" + fmt_double(r.upper_fence) + "\n";
    for (const auto& [label, x] : values)
      if (x < r.lower_fence || x > r.upper_fence) text += "outlier\t" + label + "\t" + fmt_double(x) + "\n";
    report(o, "outliers.tsv", text);
    return kOk;
  }

  int cmd_convert(const Options& o) {
    ConvertOptions opts;
    opts.format = parse_source_format(o.format);
    opts.split_name_gloss = o.split_name_gloss;
    const auto r = convert_public_dataset(o.input, o.output, opts);
    out_ << "entities\t" << r.stats.n_entities << "\nrelations\t" << r.stats.n_relations << "\ntrain\t"
         << r.stats.n_train << "\nvalid\t" << r.stats.n_valid << "\ntest\t" << r.stats.n_test
         << "\ndropped_cross_split\t" << r.dropped_cross_split << "\nmissing_names\t" << r.missing_names
         << "\nsanitized_fields\t" << r.sanitized_fields << "\n";
    return kOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  RunManifest manifest_;
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(argc, argv);
}

}  // namespace kgsynth::cli
