// Drives the installed command-line tool as a subprocess.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "bleedscan/frame_pipeline.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using bleedscan::Frame;
using bleedscan::Rgb8;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run run(const std::string& args) {
  static const fs::path err_file = oracle::scratch_dir("cli_stderr") / "stderr.txt";
  const std::string cmd = quote(BLEEDSCAN_CLI) + " " + args + " 2>" + quote(err_file.string());
  std::FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out, oracle::read_text(err_file)};
}

std::vector<std::string> lines(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write_solid(const fs::path& path, Rgb8 color, std::size_t w = 4, std::size_t h = 4) {
  bleedscan::write_ppm(Frame(w, h, std::vector<Rgb8>(w * h, color)), path.string());
}

}  // namespace

TEST_CASE("classify a single frame") {
  const auto dir = oracle::scratch_dir("cli_classify");
  write_solid(dir / "red.ppm", {255, 0, 0});
  const auto red = quote((dir / "red.ppm").string());

  auto r = run("classify " + red + " --rule purity_red");
  CHECK(r.status == 0);
  CHECK(lines(r.out) == std::vector<std::string>{"source,rule_id,matching_count,min_count,verdict",
                                                 (dir / "red.ppm").string() + ",purity_red,16,1,bleeding"});

  r = run("classify " + red + " --min-count 17 --rule purity_red --format structured");
  CHECK(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("verdict") == "non_bleeding");
  CHECK(j.at("matching_count") == 16);
  CHECK(j.at("min_count") == 17);

  r = run("classify " + red);
  CHECK(r.status == 0);
  CHECK(r.out.find(",range_ratio,0,1,non_bleeding") != std::string::npos);

  r = run("classify " + red + " --output " + quote((dir / "out.csv").string()));
  CHECK(r.status == 0);
  CHECK(r.out.empty());
  CHECK(oracle::read_text(dir / "out.csv").find("non_bleeding") != std::string::npos);

  r = run("classify " + quote((dir / "missing.ppm").string()));
  CHECK(r.status == 2);
  CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("volume of the presets and a rule document") {
  auto r = run("volume --rule range_ratio");
  CHECK(r.status == 0);
  CHECK(r.out == "10176\n");
  CHECK(run("volume --rule purity_red").out == "1\n");

  const auto dir = oracle::scratch_dir("cli_volume");
  oracle::write_text(dir / "rule.json",
                     R"({"id":"custom","r":{"lo":0,"hi":9},"g":{"lo":0,"hi":9},"b":{"lo":0,"hi":1}})");
  r = run("volume --rule " + quote((dir / "rule.json").string()));
  CHECK(r.status == 0);
  CHECK(r.out == "200\n");

  oracle::write_text(dir / "bad.json", R"({"id":"x","r":{"lo":0,"hi":300}})");
  r = run("volume --rule " + quote((dir / "bad.json").string()));
  CHECK(r.status == 2);
  CHECK(r.err.find("r.hi") != std::string::npos);
  CHECK(run("volume --rule nonsense").status == 2);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").status == 2);
  CHECK(run("volume --rule range_ratio --bogus").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("classify x.ppm --min-count 0").status == 2);
  CHECK(run("classify x.ppm --min-count abc").status == 2);
  CHECK(run("classify x.ppm --format xml").status == 2);
  CHECK(run("gen --seed 1 --n 10 --bleeding-fraction 1.5 --out /tmp/x").status == 2);
  CHECK(run("gen --seed 1 --n 1 --bleeding-fraction 0.5 --out " +
            quote((oracle::scratch_dir("cli_usage") / "c").string()))
            .status == 2);
  CHECK(run("eval --rule range_ratio").status == 2);
  CHECK(run("--help").status == 0);
  CHECK(run("--version").out == "1.0.0\n");
}

TEST_CASE("gen then eval reproduces the corpus labels") {
  const auto dir = oracle::scratch_dir("cli_gen");
  auto g = run("gen --seed 42 --n 100 --bleeding-fraction 0.5 --width 48 --height 48 --out " +
               quote((dir / "corpus").string()));
  REQUIRE(g.status == 0);
  const auto manifest = (dir / "corpus" / "manifest.csv").string();
  CHECK(g.out == manifest + "\n");

  auto r = run("eval --manifest " + quote(manifest) + " --rule range_ratio --rule purity_red");
  REQUIRE(r.status == 0);
  const auto doc = nlohmann::json::parse(r.out);
  const auto& range = doc.at("reports").at(0);
  CHECK(range.at("rule_id") == "range_ratio");
  CHECK(range.at("tp") == 50);
  CHECK(range.at("tn") == 50);
  CHECK(range.at("accuracy").get<double>() == 1.0);
  const auto& purity = doc.at("reports").at(1);
  CHECK(purity.at("predicted_bleeding") == 0);
  CHECK(purity.at("accuracy").get<double>() == 0.5);

  r = run("eval --table --format csv --manifest " + quote(manifest) +
          " --rule purity_red --rule range_ratio --workers 3");
  REQUIRE(r.status == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() == 7);
  CHECK(out[0].rfind("Classification", 0) == 0);
  CHECK(out[1].find("50%") != std::string::npos);
  CHECK(out[2].find("100%") != std::string::npos);
  CHECK(out[3].empty());
  CHECK(out[4].rfind("rule_id,", 0) == 0);
  CHECK(out[6].rfind("range_ratio,1,100,50,0,50,0,", 0) == 0);

  CHECK(run("eval --manifest " + quote(manifest) + " --rule range_ratio --rule range_ratio").status == 2);
  CHECK(run("eval --manifest " + quote((dir / "none.csv").string()) + " --rule range_ratio").status == 2);
}

TEST_CASE("batch output is ordered, complete and independent of workers") {
  const auto dir = oracle::scratch_dir("cli_batch");
  const auto frames = dir / "frames";
  fs::create_directories(frames);
  for (int i = 0; i < 30; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%02d.ppm", i);
    write_solid(frames / name, i % 3 == 0 ? Rgb8{100, 20, 5} : Rgb8{180, 100, 120}, 8 + i, 8);
  }
  oracle::write_text(frames / "f10.ppm", "P6 2 2 255\nxx");  // truncated
  oracle::write_text(frames / "notes.txt", "ignored");

  const auto base = run("batch " + quote(frames.string()) + " --workers 1");
  REQUIRE(base.status == 0);
  const auto out = lines(base.out);
  REQUIRE(out.size() == 31);
  CHECK(out[0] == "source,rule_id,matching_count,min_count,verdict");
  CHECK(out[1] == (frames / "f00.ppm").string() + ",range_ratio,64,1,bleeding");
  CHECK(out[2] == (frames / "f01.ppm").string() + ",range_ratio,0,1,non_bleeding");
  CHECK(out[11].rfind((frames / "f10.ppm").string() + ",range_ratio,,,\"error:", 0) == 0);

  for (int workers : {2, 4, 8}) {
    CHECK(run("batch " + quote(frames.string()) + " --workers " + std::to_string(workers)).out ==
          base.out);
  }
  CHECK(run("batch " + quote(frames.string())).out == base.out);

  const auto structured = run("batch " + quote(frames.string()) + " --format structured --workers 4");
  const auto records = lines(structured.out);
  REQUIRE(records.size() == 30);
  CHECK(nlohmann::json::parse(records[10]).contains("error"));
  CHECK(nlohmann::json::parse(records[3]).at("verdict") == "bleeding");

  // List file: given order, relative to the list's directory, duplicates kept.
  oracle::write_text(dir / "list.txt", "# header\nframes/f03.ppm\n\nframes/f01.ppm\nframes/f03.ppm\n");
  const auto listed = lines(run("batch " + quote((dir / "list.txt").string())).out);
  REQUIRE(listed.size() == 4);
  CHECK(listed[1].rfind((dir / "frames" / "f03.ppm").string() + ",", 0) == 0);
  CHECK(listed[2].rfind((dir / "frames" / "f01.ppm").string() + ",", 0) == 0);
  CHECK(listed[3] == listed[1]);

  CHECK(run("batch " + quote((dir / "nothing").string())).status == 2);
  CHECK(run("batch " + quote(frames.string()) + " --workers 0").status == 2);
}
