#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "shuffleguard/report.hpp"

using namespace shuffleguard;

namespace {

AccuracyReport sample_report() {
  AccuracyReport r;
  r.manifest_hash = "abc123";
  r.seed = 7;
  r.wall_seconds = 12.5;
  r.rows.push_back({"clean", 0.0, 0, false, true, 1000, 0.6310, 0.6310});
  r.rows.push_back({"pgd20", 8.0 / 255.0, 20, false, true, 1000, 0.6310, 0.0840});
  r.rows.push_back({"bpda40r_wrongkey", 8.0 / 255.0, 40, true, false, 500, 0.6310, 0.6020});
  return r;
}

}  // namespace

TEST_CASE("csv layout is frozen and deterministic") {
  const std::string expected =
      "# manifest abc123\n"
      "condition,epsilon,iterations,random_init,key_match,samples,clean_acc,attacked_acc\n"
      "clean,0/255,0,false,true,1000,0.631000,0.631000\n"
      "pgd20,8/255,20,false,true,1000,0.631000,0.084000\n"
      "bpda40r_wrongkey,8/255,40,true,false,500,0.631000,0.602000\n";
  CHECK(report_csv(sample_report()) == expected);

  AccuracyReport later = sample_report();
  later.wall_seconds = 99.0;  // timing never leaks into the CSV
  CHECK(report_csv(later) == expected);
}

TEST_CASE("csv rejects accuracies outside the unit interval") {
  AccuracyReport r = sample_report();
  r.rows[0].clean_acc = 1.5;
  CHECK_THROWS_AS(report_csv(r), std::logic_error);
  r = sample_report();
  r.rows[1].attacked_acc = -0.1;
  CHECK_THROWS_AS(report_csv(r), std::logic_error);
}

TEST_CASE("json report carries provenance and parses back") {
  const std::string text = report_json(sample_report());
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["manifest_hash"] == "abc123");
  CHECK(j["seed"] == 7);
  CHECK(j["wall_seconds"] == 12.5);
  REQUIRE(j["rows"].size() == 3);
  CHECK(j["rows"][1]["condition"] == "pgd20");
  CHECK(j["rows"][1]["epsilon"] == "8/255");
  CHECK(j["rows"][1]["attacked_acc"] == 0.084);
  CHECK(j["rows"][2]["key_match"] == false);
  CHECK(j["rows"][2]["samples"] == 500);
}

TEST_CASE("svg plot is well-formed and deterministic") {
  const AccuracyReport r = sample_report();
  const std::string svg = report_svg(r, "accuracy vs budget");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("accuracy vs budget") != std::string::npos);
  CHECK(svg.find("8/255") != std::string::npos);
  CHECK(svg == report_svg(r, "accuracy vs budget"));

  AccuracyReport empty;
  const std::string no_rows = report_svg(empty, "empty");
  CHECK(no_rows.find("polyline") == std::string::npos);
  CHECK(no_rows.find("<svg") != std::string::npos);
}

TEST_CASE("report files land on disk") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sg_report_out";
  fs::create_directories(dir);
  const AccuracyReport r = sample_report();
  write_report_csv(dir / "r.csv", r);
  write_report_json(dir / "r.json", r);
  write_report_svg(dir / "r.svg", r, "t");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  CHECK(slurp(dir / "r.csv") == report_csv(r));
  CHECK(slurp(dir / "r.json") == report_json(r));
  CHECK(slurp(dir / "r.svg") == report_svg(r, "t"));
  fs::remove_all(dir);
}
