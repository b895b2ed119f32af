#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

using namespace kgsynth;
using kgtest::TempDir;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kgsynth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& file) {
  std::map<std::string, std::string> m;
  tsv::for_each_line(tsv::read_file(file), [&](std::size_t, std::string_view line) {
    if (line.empty()) return;
    const auto tab = line.find('\t');
    m.emplace(std::string(line.substr(0, tab)), std::string(line.substr(tab + 1)));
  });
  return m;
}

std::string without_times(std::string manifest) {
  std::string out;
  std::istringstream in(manifest);
  for (std::string line; std::getline(in, line);)
    if (line.rfind("start_time", 0) != 0 && line.rfind("end_time", 0) != 0) out += line + "\n";
  return out;
}

std::string data_dir(const TempDir& dir, const KnowledgeGraph& kg, const std::string& name = "data") {
  write_dataset(kg, dir / name);
  return (dir / name).string();
}

}  // namespace

TEST(Cli, HelpAndVersion) {
  auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("transform"), std::string::npos);
  r = invoke({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(cli::kVersion), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({"stats"}).code, 1);
  EXPECT_EQ(invoke({"transform", "--input", "x", "--output", "y"}).code, 1);
  EXPECT_EQ(invoke({"evaluate", "-i", "x", "-p", "y", "--raw", "--filtered"}).code, 1);
}

TEST(Cli, StatsWritesReportAndManifest) {
  TempDir dir;
  const auto in = data_dir(dir, kgtest::tiny_kg());
  const auto r = invoke({"stats", "--input", in, "--output", (dir / "rep").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "entities\t5\nrelations\t2\ntrain\t4\nvalid\t1\ntest\t1\n");
  EXPECT_EQ(tsv::read_file(dir / "rep" / "stats.tsv"), r.out);
  const auto m = read_manifest(dir / "rep" / "manifest.tsv");
  EXPECT_EQ(m.at("command"), "stats");
  EXPECT_EQ(m.at("input"), in);
  EXPECT_EQ(m.at("status"), "0");
  EXPECT_EQ(m.at("version"), cli::kVersion);
  EXPECT_EQ(m.at("start_time").size(), 20u);
}

TEST(Cli, ManifestGoesToStderrWithoutOutput) {
  TempDir dir;
  const auto r = invoke({"leakage", "--input", data_dir(dir, kgtest::bernoulli_kg())});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("percent\t"), std::string::npos);
  EXPECT_NE(r.err.find("command\tleakage\n"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("status\t0\n"), std::string::npos);
}

TEST(Cli, MissingInputIsDataError) {
  TempDir dir;
  const auto r = invoke({"relation-dist", "--input", (dir / "absent").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("i/o error"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("status\t2"), std::string::npos);
}

TEST(Cli, BadRecipeIsDataError) {
  TempDir dir;
  const auto in = data_dir(dir, kgtest::tiny_kg());
  EXPECT_EQ(invoke({"transform", "-i", in, "-o", (dir / "o").string(), "--recipe", "shuffle", "--targets", "entities"}).code,
            2);
  EXPECT_EQ(invoke({"transform", "-i", in, "-o", (dir / "o").string(), "--recipe", "virtual-world", "--targets",
                    "descriptions"})
                .code,
            2);
}

TEST(Cli, InfeasibleIsExitThree) {
  TempDir dir;
  const auto kg = KnowledgeGraph::from_ids({{"a", "A"}, {"b", "B"}}, {{"r", "R"}, {"s", "S"}}, {},
                                           {{"a", "r", "b"}, {"a", "s", "b"}}, {}, {});
  const auto in = data_dir(dir, kg);
  const auto r = invoke({"transform", "-i", in, "-o", (dir / "o").string(), "--recipe", "virtual-world", "--targets",
                         "relations"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("infeasible"), std::string::npos) << r.err;
  EXPECT_EQ(read_manifest(dir / "o" / "manifest.tsv").at("status"), "3");
  const auto s = invoke({"suite", "-i", in, "-o", (dir / "s").string(), "--variants", "base,vw-e,vw-r"});
  EXPECT_EQ(s.code, 3);
  EXPECT_NE(s.out.find("vw-e\tok"), std::string::npos) << s.out;
  EXPECT_NE(s.out.find("vw-r\tfailed"), std::string::npos);
}

TEST(Cli, DivergenceIsInternalError) {
  TempDir dir;
  const auto in = data_dir(dir, kgtest::cluster_kg());
  const auto r = invoke({"train-baseline", "-i", in, "-o", (dir / "m").string(), "--dim", "4", "--epochs", "2",
                         "--lr", "1e308", "--threads", "1"});
  EXPECT_EQ(r.code, 4) << r.err;
  EXPECT_NE(r.err.find("epoch 1"), std::string::npos) << r.err;
}

TEST(Cli, TransformIsByteDeterministic) {
  TempDir dir;
  const auto in = data_dir(dir, kgtest::bernoulli_kg());
  for (std::string run : {"a", "b"}) {
    const auto r = invoke({"transform", "-i", in, "-o", (dir / run).string(), "--recipe", "anonymized-entities",
                           "--targets", "entities,relations", "--seed", "17", "--dump-unigram",
                           "--threads", run == "a" ? "1" : "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (auto f : {"entities.tsv", "relations.tsv", "descriptions.tsv", "train.tsv", "mapping.tsv", "recipe.txt",
                 "unigram.tsv"})
    EXPECT_EQ(tsv::read_file(dir / "a" / f), tsv::read_file(dir / "b" / f)) << f;
  auto ma = read_manifest(dir / "a" / "manifest.tsv");
  EXPECT_EQ(ma.at("seed"), "17");
  EXPECT_EQ(ma.at("param.recipe"), "anonymized-entities");
  EXPECT_EQ(ma.at("param.targets"), "entities,relations");
  EXPECT_EQ(ma.at("param.dump-unigram"), "true");
  const auto once = without_times(tsv::read_file(dir / "a" / "manifest.tsv"));
  invoke({"transform", "-i", in, "-o", (dir / "a").string(), "--recipe", "anonymized-entities", "--targets",
          "entities,relations", "--seed", "17", "--dump-unigram", "--threads", "1"});
  EXPECT_EQ(without_times(tsv::read_file(dir / "a" / "manifest.tsv")), once);
}

TEST(Cli, SuiteProducesThirteenDirectories) {
  TempDir dir;
  const auto in = data_dir(dir, kgtest::bernoulli_kg());
  const auto r = invoke({"suite", "-i", in, "-o", (dir / "suite").string(), "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t dirs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "suite")) dirs += e.is_directory();
  EXPECT_EQ(dirs, 13u);
  EXPECT_TRUE(std::filesystem::exists(dir / "suite" / "manifest.tsv"));
  EXPECT_EQ(invoke({"suite", "-i", in, "-o", (dir / "x").string(), "--variants", "base,nope"}).code, 2);
}

TEST(Cli, EvaluateGoldFirstGivesPerfectHits) {
  TempDir dir;
  const auto kg = kgtest::six_entity_kg();
  const auto in = data_dir(dir, kg);
  std::string preds;
  for (const Triple& t : kg.triples(Split::test)) {
    const auto ids = kg.to_ids(t);
    for (std::string dir_name : {"head", "tail"}) {
      const std::string gold = dir_name == "tail" ? ids.tail : ids.head;
      std::string list = gold;
      for (EntityIndex e = 0; e < kg.num_entities(); ++e)
        if (kg.entity_id(e) != gold) list += "," + kg.entity_id(e);
      preds += ids.head + "\t" + ids.relation + "\t" + ids.tail + "\t" + dir_name + "\t" + list + "\n";
    }
  }
  tsv::write_file(dir / "preds.tsv", preds);
  const auto r = invoke({"evaluate", "-i", in, "-p", (dir / "preds.tsv").string(), "-o", (dir / "ev").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("hits@10\t1.000000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("ranking\tfiltered"), std::string::npos);
  const auto raw = invoke({"evaluate", "-i", in, "-p", (dir / "preds.tsv").string(), "--raw"});
  EXPECT_NE(raw.out.find("ranking\traw"), std::string::npos);
  tsv::write_file(dir / "bad.tsv", preds.substr(0, preds.find('\n') + 1));
  EXPECT_EQ(invoke({"evaluate", "-i", in, "-p", (dir / "bad.tsv").string()}).code, 2);
}

TEST(Cli, TrainBaselineWritesCheckpointAndMetrics) {
  TempDir dir;
  const auto in = data_dir(dir, kgtest::cluster_kg());
  const auto r = invoke({"train-baseline", "-i", in, "-o", (dir / "m").string(), "--dim", "8", "--epochs", "5",
                         "--norm", "l2", "--seed", "3", "--threads", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "m" / "entities.tsv"));
  EXPECT_NE(tsv::read_file(dir / "m" / "metrics.tsv").find("split\ttest"), std::string::npos);
  const auto m = read_manifest(dir / "m" / "manifest.tsv");
  EXPECT_EQ(m.at("param.dim"), "8");
  EXPECT_EQ(m.at("param.norm"), "l2");
  EXPECT_EQ(m.at("param.raw"), "false");
  EXPECT_EQ(invoke({"train-baseline", "-i", in, "-o", (dir / "n").string(), "--norm", "l7"}).code, 2);
}

TEST(Cli, CorrelateAndOutliers) {
  TempDir dir;
  tsv::write_file(dir / "table.tsv", "a\tb\n1\t2\n2\t4\n3\t6.5\n");
  auto r = invoke({"correlate", "-i", (dir / "table.tsv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "label\ta\tb");
  tsv::write_file(dir / "values.tsv", "w1\t1\nw2\t2\nw3\t3\nw4\t4\nw5\t100\n");
  r = invoke({"outliers", "-i", (dir / "values.tsv").string(), "-o", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("outlier\tw5\t100\n"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("outlier\tw4"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "o" / "outliers.tsv"));
  tsv::write_file(dir / "bad.tsv", "1\nx\n3\n4\n");
  EXPECT_EQ(invoke({"outliers", "-i", (dir / "bad.tsv").string()}).code, 2);
}

TEST(Cli, ConvertKgbertLayout) {
  TempDir dir;
  const auto src = dir / "src";
  std::filesystem::create_directories(src);
  tsv::write_file(src / "train.tsv", "x\tr\ty\n");
  tsv::write_file(src / "dev.tsv", "y\tr\tz\n");
  tsv::write_file(src / "test.tsv", "z\tr\tx\n");
  tsv::write_file(src / "entity2text.txt", "x\tEx, the first\n");
  const auto r = invoke({"convert", "-i", src.string(), "-o", (dir / "out").string(), "--split-name-gloss"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("entities\t3\n"), std::string::npos) << r.out;
  EXPECT_EQ(load_dataset(dir / "out").entity_name(0), "Ex");
  EXPECT_EQ(invoke({"convert", "-i", src.string(), "-o", (dir / "o2").string(), "--format", "csv"}).code, 2);
}
