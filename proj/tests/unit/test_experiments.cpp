#include <doctest.h>

#include <cmath>
#include <fstream>

#include "adtg/experiments.hpp"
#include "test_util.hpp"

using namespace adtg;

TEST_SUITE("experiments") {
  TEST_CASE("summary statistics") {
    const std::vector<double> x{3.0, 1.0, 2.0, 10.0};
    CHECK(mean(x) == 4.0);
    CHECK(median(x) == 2.5);
    CHECK(median(std::vector<double>{5.0, 1.0, 3.0}) == 3.0);
    CHECK(mean_abs_error(x, std::vector<double>{3.0, 2.0, 2.0, 7.0}) == 1.0);
  }

  TEST_CASE("pearson and spearman") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{2, 4, 6, 8, 10};
    const std::vector<double> cube{1, 8, 27, 64, 125};
    CHECK(pearson(x, y) == doctest::Approx(1.0));
    CHECK(pearson(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman(x, cube) == doctest::Approx(1.0));
    CHECK(pearson(x, cube) < 1.0);
    CHECK(pearson(x, std::vector<double>(5, 2.0)) == 0.0);
    // ties take the average rank: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4)
    const double r = spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 2, 3, 4});
    CHECK(r == doctest::Approx(pearson(std::vector<double>{1, 2.5, 2.5, 4}, std::vector<double>{1, 2, 3, 4})));
  }

  TEST_CASE("total variance") {
    const std::vector<Heightmap> maps{Heightmap::flat(4, 4, 1.0, 1.0), Heightmap::flat(4, 4, 1.0, 3.0)};
    CHECK(total_variance(maps) == doctest::Approx(16.0));
  }

  TEST_CASE("held-out curve and threshold crossing") {
    std::vector<MetricsRow> rows(4);
    rows[0].phase = "select";
    rows[1].phase = "eval";
    rows[1].epoch = 4;
    rows[1].heldout_success = 0.4;
    rows[2].phase = "eval";
    rows[2].epoch = 9;
    rows[2].heldout_success = 0.65;
    rows[3].phase = "synth";
    const auto curve = heldout_curve(rows);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].epoch == 5);
    CHECK(curve[1].epoch == 10);
    CHECK(epochs_to_reach(curve, 0.6) == std::optional<int>(10));
    CHECK_FALSE(epochs_to_reach(curve, 0.7).has_value());
  }

  TEST_CASE("consistency experiment writes one row per synthesis") {
    BumpPriorConfig pc;
    pc.layouts = 2;
    pc.levels = 4;
    const auto prior = make_bump_prior(pc, 12, 12, 0.25);
    const auto schedule = make_cosine_schedule(32);
    const AnalyticMixturePredictor pred(prior);
    ConsistencyConfig cc;
    cc.syntheses = 6;
    cc.dataset_size = 12;
    const auto rows = run_consistency(prior, schedule, pred, {}, cc, 3, 2);
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows) {
      CHECK(r.k >= 1);
      CHECK(r.k <= 16);
      CHECK(r.sources >= 2);
      CHECK(r.sources <= 4);
      CHECK(r.predicted >= 0.0);
      CHECK(r.predicted <= 1.0);
    }
    const auto again = run_consistency(prior, schedule, pred, {}, cc, 3, 1);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].actual == rows[i].actual);

    adtg::test::TempDir dir("consistency");
    write_consistency_csv(rows, dir / "c.csv");
    std::ifstream in(dir / "c.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "trial,k,sources,predicted_success,actual_success");
  }
}
