#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "shiftshare/csv.hpp"
#include "shiftshare/dataset.hpp"
#include "shiftshare/errors.hpp"

using namespace shiftshare;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "shiftshare_unit";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_text(const std::string& name, const std::string& text) {
  auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("CSV fields survive a write/read round trip") {
  csv::Table t;
  t.header = {"a", "b,c", "q\"uote"};
  t.rows = {{"1", "x,y", "say \"hi\""}, {"", "2", "3"}};
  const auto p = scratch("roundtrip.csv");
  csv::write(p, t);
  const auto back = csv::read(p);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b,c") == 1);
  CHECK(back.column("zzz") == -1);

  double v;
  CHECK(csv::parse_double(csv::format_double(0.1 + 0.2), v));
  CHECK(v == 0.1 + 0.2);
  CHECK(csv::parse_double("NA", v));
  CHECK(std::isnan(v));
  CHECK_FALSE(csv::parse_double("1.5abc", v));
}

TEST_CASE("load_panel maps roles to columns") {
  const auto p = write_text("panel.csv",
                            "id,y,x,z,w_a,w_b,d1,other\n"
                            "r1,1.0,0.5,0.2,0.1,0.2,3,9\n"
                            "r2,2.0,1.5,0.4,0.3,0.0,4,9\n"
                            "r3,2.5,2.5,0.6,0.0,0.7,5,9\n");
  ColumnMapping m;
  m.z = "z";
  m.id = "id";
  m.covariates = {"d1"};
  const auto panel = load_panel(p, m);
  CHECK(panel.n() == 3);
  CHECK(panel.J() == 2);
  CHECK(panel.p() == 1);
  CHECK(panel.share_names == std::vector<std::string>{"w_a", "w_b"});
  CHECK(panel.w(2, 1) == 0.7);
  CHECK((*panel.z)(1) == 0.4);
  CHECK(panel.region_id[2] == "r3");

  SUBCASE("glob share pattern") {
    ColumnMapping g = m;
    g.shares_prefix = "w_[b]";
    CHECK(load_panel(p, g).J() == 1);
  }
  SUBCASE("write_panel round trip") {
    const auto q = scratch("panel_back.csv");
    write_panel(panel, q);
    const auto again = load_panel(q, m);
    CHECK(again.x == panel.x);
    CHECK(again.w == panel.w);
    CHECK(again.region_id == panel.region_id);
  }
}

TEST_CASE("panel validation errors") {
  ColumnMapping m;
  m.id = "id";
  CHECK(code_of([&] { load_panel(write_text("e1.csv", "y,x,w_1\n1,2,0.1\n2,3,0.2\n"), [] {
          ColumnMapping c;
          c.y = "missing";
          return c;
        }()); }) == Errc::MissingColumn);
  CHECK(code_of([&] { load_panel(write_text("e2.csv", "y,x,w_1\n1,NA,0.1\n2,3,0.2\n"), ColumnMapping{}); }) ==
        Errc::NonFinite);
  CHECK(code_of([&] { load_panel(write_text("e3.csv", "y,x,w_1\n1,2,-0.1\n2,3,0.2\n"), ColumnMapping{}); }) ==
        Errc::NegativeShare);
  CHECK(code_of([&] { load_panel(write_text("e4.csv", "id,y,x,w_1\na,1,2,0.1\na,2,3,0.2\n"), m); }) ==
        Errc::DuplicateRegion);
  CHECK(code_of([&] { load_panel(write_text("e5.csv", "y,x,w_1\n1,2,0.1\n2,2,0.2\n"), ColumnMapping{}); }) ==
        Errc::DegenerateTreatment);
  CHECK(code_of([&] { load_panel(write_text("e6.csv", "y,x,w_1\n"), ColumnMapping{}); }) == Errc::EmptyPanel);
  CHECK(code_of([&] { load_panel(scratch("does_not_exist.csv"), ColumnMapping{}); }) == Errc::Io);
  CHECK(is_input_error(Errc::MissingColumn));
  CHECK_FALSE(is_input_error(Errc::NoConvergence));
}

TEST_CASE("pooled panels split by period in order of appearance") {
  const auto p = write_text("pooled.csv",
                            "id,period,y,x,w_1\n"
                            "a,2000,1,1,0.1\n"
                            "a,1990,2,2,0.2\n"
                            "b,2000,3,4,0.3\n"
                            "b,1990,4,3,0.4\n"
                            "c,1990,5,5,0.5\n");
  ColumnMapping m;
  m.id = "id";
  m.period = "period";
  const auto panel = load_panel(p, m);  // the same ids in two periods are fine
  const auto parts = split_periods(panel);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].period_label == "2000");
  CHECK(parts[0].n() == 2);
  CHECK(parts[1].period_label == "1990");
  CHECK(parts[1].x(2) == 5.0);
  const auto rows = period_rows(panel);
  CHECK(rows[1] == std::vector<Eigen::Index>{1, 3, 4});
}

TEST_CASE("sector panel loading and period filter") {
  const auto p = write_text("sectors.csv",
                            "sector,period,m_t,m_tm1,l_t\n"
                            "s1,p1,2,1,1\n"
                            "s2,p1,1,2,1\n"
                            "s1,p2,5,4,2\n"
                            "s2,p2,3,3,2\n");
  SectorSchema schema;
  schema.period = "period";
  Eigen::MatrixXd shares(3, 2);
  shares << 1, 0, 0, 1, 0.5, 0.5;
  const auto s = load_sector_panel(p, schema, shares, "p2");
  CHECK(s.J() == 2);
  CHECK(s.m_t(0) == 5.0);
  CHECK(s.l_t(1) == 2.0);
  CHECK(code_of([&] { load_sector_panel(p, schema, shares, "p9"); }) == Errc::EmptyPanel);
  Eigen::MatrixXd bad = shares;
  bad(0, 0) = -1.0;
  CHECK(code_of([&] { load_sector_panel(p, schema, bad, "p1"); }) == Errc::NegativeShare);
}

}
