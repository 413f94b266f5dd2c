#include <doctest.h>

#include <cmath>
#include <limits>

#include "fldelay/model.hpp"
#include "fldelay/optimizer.hpp"
#include "fldelay/rng.hpp"
#include "oracles.hpp"

using namespace fldelay;

namespace {

// K=2 scenario with a = 10, v = 2, workloads {1e9, 2e9} cycles at f = 1e9
// (so compute budgets 1 s and 2 s), upload 1e5 bits, g*p/n0 = {1e6, 3e5} Hz.
model::Scenario toy_two_user(double bandwidth = 1e6) {
  model::LearningConfig learn{1.0, 1.0, 1.0, 1.0, std::exp(-5.0)};
  model::UserProfile u1{1e6, 500, 1e9, 1.0, 1e-3};
  model::UserProfile u2{2e6, 500, 1e9, 1.0, 3e-4};
  model::NetworkConfig net{bandwidth, 1e-9, 1e5};
  return model::make_scenario({u1, u2}, net, learn, 0);
}

model::Scenario symmetric_scenario(int k, double bandwidth = 20e6) {
  model::LearningConfig learn{1.0, 1.0, 0.1, 0.1, 1e-3};
  model::UserProfile u{2e4, 500, 2e9, 0.01, 1e-10};
  std::vector<model::UserProfile> users(static_cast<std::size_t>(k), u);
  model::NetworkConfig net{bandwidth, 3.9810717055349695e-21, 28.1e3};
  return model::make_scenario(std::move(users), net, learn, 0);
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("t_star closed forms") {
  const double a = 10.0;
  // log2(1/2) = -1 turns the workload term into -A/f
  CHECK(opt::t_star(0.5, 40.0, a, 1e9, 1e9) ==
        doctest::Approx(0.5 * 40.0 / a - 1.0).epsilon(1e-14));
  // exact cancellation at T = 2a, A = f
  CHECK(opt::t_star(0.5, 2.0 * a, a, 1e9, 1e9) == doctest::Approx(0.0));
  // approaching eta = 1 both terms vanish
  CHECK(opt::t_star(1.0 - 1e-12, 40.0, a, 1e9, 1e9) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(opt::t_star(0.0, 1.0, a, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(opt::t_star(1.0, 1.0, a, 1.0, 1.0), std::domain_error);
}

TEST_CASE("required_rate") {
  const double a = 10.0;
  // T = 4a, A/f = 1, eta = 1/2: window is 2 - 1 = 1 s
  CHECK(opt::required_rate(0.5, 4.0 * a, a, 1e9, 1e9, 1e6) ==
        doctest::Approx(1e6).epsilon(1e-12));
  // very large T: rate tends to 2*a*s/T
  const double big_t = 1e9;
  CHECK(opt::required_rate(0.5, big_t, a, 1e9, 1e9, 1e6) ==
        doctest::Approx(2.0 * a * 1e6 / big_t).epsilon(1e-6));
  // closed window
  CHECK_THROWS_AS(opt::required_rate(0.5, 2.0 * a, a, 1e9, 1e9, 1e6),
                  std::domain_error);
}

TEST_CASE("required_bandwidth against a forward bisection oracle") {
  CHECK(opt::required_bandwidth(0.0, 1e-3, 1.0, 1e-9) == 0.0);

  // g*p/n0 = 1e6 Hz, rate 5e5: invert b*log2(1 + 1e6/b) by plain bisection
  const double g = 1e-3, p = 1.0, n0 = 1e-9;
  const double target = 5e5;
  const double expected = oracles::plain_bisect(
      [&](double b) { return b * std::log2(1.0 + 1e6 / b) - target; }, 1e-3,
      1e9);
  const double b = opt::required_bandwidth(target, g, p, n0);
  CHECK(b == doctest::Approx(expected).epsilon(1e-10));
  CHECK(model::achievable_rate(b, p, g, n0) ==
        doctest::Approx(target).epsilon(1e-12));

  // at the ceiling no finite bandwidth suffices
  const double ceiling = model::capacity_ceiling(g, p, n0);
  CHECK_THROWS_AS(opt::required_bandwidth(ceiling, g, p, n0),
                  std::domain_error);
  CHECK_THROWS_AS(opt::required_bandwidth(ceiling * 2.0, g, p, n0),
                  std::domain_error);
}

TEST_CASE("required_bandwidth just below the ceiling stays finite") {
  const double g = 1e-3, p = 1.0, n0 = 1e-9;
  const double ceiling = model::capacity_ceiling(g, p, n0);
  for (const double back_off : {1e-7, 1e-9, 1e-12, 1e-15}) {
    const double rate = ceiling * (1.0 - back_off);
    if (!(rate < ceiling)) continue;
    const double b = opt::required_bandwidth(rate, g, p, n0);
    CHECK(std::isfinite(b));
    CHECK(b > 0.0);
  }
}

TEST_CASE("objective evaluation is total at the domain endpoints") {
  const auto sc = model::generate_scenario(65, 4);
  const double T = opt::minimize_delay(sc).total_delay * 1.2;
  const auto dom = opt::eta_domain(T, sc);
  REQUIRE(dom.has_value());
  for (const double eta : {dom->lo, dom->hi}) {
    const double v = opt::total_required_bandwidth(eta, T, sc);
    CHECK((std::isfinite(v) || std::isinf(v)));  // a value either way, no throw
    CHECK(v > 0.0);
  }
}

TEST_CASE("rate inversion round trip across the admissible range") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double g = std::pow(10.0, rng.uniform(-13.0, -8.0));
    const double p = std::pow(10.0, rng.uniform(-3.0, 0.0));
    const double n0 = 3.9810717055349695e-21;
    const double ceiling = model::capacity_ceiling(g, p, n0);
    const double r = ceiling * 0.999 * std::pow(10.0, rng.uniform(-6.0, 0.0));
    const double back =
        model::achievable_rate(opt::required_bandwidth(r, g, p, n0), p, g, n0);
    CHECK(std::abs(back - r) <= 1e-9 * r);
  }
}

TEST_CASE("total_required_bandwidth composition and symmetry") {
  const auto sym = symmetric_scenario(2);
  const auto single = symmetric_scenario(1);
  const double T = opt::t_upper_bound(sym);
  const double eta = 0.5;

  // two identical users need exactly twice the single-user bandwidth
  const double b2 = opt::total_required_bandwidth(eta, T, sym);
  const double b1 = opt::total_required_bandwidth(eta, T, single);
  CHECK(b2 == doctest::Approx(2.0 * b1).epsilon(1e-12));

  // single user reduces to the scalar composition
  const auto& u = single.users[0];
  const double direct = opt::required_bandwidth(
      opt::required_rate(eta, T, single.derived.a, single.derived.workload[0],
                         u.f_max, single.net.upload_bits),
      u.gain, u.p_max, single.net.noise_psd);
  CHECK(b1 == doctest::Approx(direct).epsilon(1e-14));

  // eta -> 1 closes every window
  CHECK(opt::total_required_bandwidth(1.0 - 1e-15, T, sym) ==
        std::numeric_limits<double>::infinity());
  CHECK(opt::total_required_bandwidth(0.5, 0.0, sym) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("eta_domain endpoints") {
  SUBCASE("nonpositive T yields an empty domain") {
    CHECK_FALSE(opt::eta_domain(0.0, toy_two_user()).has_value());
    CHECK_FALSE(opt::eta_domain(-5.0, toy_two_user()).has_value());
  }
  SUBCASE("huge T approaches the full (0,1)") {
    const auto dom = opt::eta_domain(1e12, toy_two_user());
    REQUIRE(dom.has_value());
    CHECK(dom->lo <= 1e-6);
    CHECK(dom->hi >= 1.0 - 1e-6);
  }
  SUBCASE("boundary against the analytic root") {
    // One user, T = 2a with a unit compute budget and negligible minimum
    // window: t* > 0 iff 2(1-eta) > log2(1/eta), whose lower root is 1/2.
    model::LearningConfig learn{1.0, 1.0, 1.0, 1.0, std::exp(-5.0)};
    model::UserProfile u{1e6, 500, 1e9, 1.0, 6.93e-5};  // g*p/n0 = 6.93e16
    model::NetworkConfig net{2e7, 1e-21, 1e5};
    const auto sc = model::make_scenario({u}, net, learn, 0);
    const double a = sc.derived.a;
    CHECK(a == doctest::Approx(10.0).epsilon(1e-13));

    const double analytic = oracles::plain_bisect(
        [](double eta) { return 2.0 * (1.0 - eta) - std::log2(1.0 / eta); },
        0.3, 0.6);
    CHECK(analytic == doctest::Approx(0.5).epsilon(1e-10));

    const auto dom = opt::eta_domain(2.0 * a, sc);
    REQUIRE(dom.has_value());
    CHECK(dom->lo == doctest::Approx(analytic).epsilon(1e-5));
    CHECK(dom->hi > 1.0 - 1e-6);
  }
}

TEST_CASE("solve_eta_star minimality and the dense grid oracle") {
  const auto sc = toy_two_user();
  const double T = 100.0;
  const auto dom = opt::eta_domain(T, sc);
  REQUIRE(dom.has_value());

  const auto es = opt::solve_eta_star(T, sc);

  SUBCASE("dense 1e6-point scan") {
    double best = std::numeric_limits<double>::infinity();
    double best_eta = 0.0;
    constexpr int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double eta = dom->lo + dom->width() * (i + 0.5) / n;
      const double v = opt::total_required_bandwidth(eta, T, sc);
      if (v < best) {
        best = v;
        best_eta = eta;
      }
    }
    CHECK(es.eta == doctest::Approx(best_eta).epsilon(1e-4));
    CHECK(es.bandwidth <= best * (1.0 + 1e-9));
  }

  SUBCASE("no sampled eta does better") {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
      const double eta = rng.uniform(dom->lo, dom->hi);
      CHECK(es.bandwidth <=
            opt::total_required_bandwidth(eta, T, sc) * (1.0 + 1e-9));
    }
  }

  SUBCASE("derivative bisection agrees with golden section") {
    const auto alt = opt::solve_eta_star(T, sc, opt::EtaSearch::DerivativeBisection);
    CHECK(alt.eta == doctest::Approx(es.eta).epsilon(1e-6));
    CHECK(alt.bandwidth == doctest::Approx(es.bandwidth).epsilon(1e-9));
  }

  SUBCASE("empty domain raises") {
    CHECK_THROWS_AS(opt::solve_eta_star(1e-6, sc), std::domain_error);
  }
}

TEST_CASE("solve_eta_star is K-independent on symmetric scenarios") {
  const double T = 30.0;
  const auto one = opt::solve_eta_star(T, symmetric_scenario(1));
  for (int k : {2, 3, 5}) {
    const auto many = opt::solve_eta_star(T, symmetric_scenario(k));
    CHECK(many.eta == doctest::Approx(one.eta).epsilon(1e-7));
    CHECK(many.bandwidth == doctest::Approx(k * one.bandwidth).epsilon(1e-7));
  }
}

TEST_CASE("search routes agree on random scenarios") {
  for (int s = 0; s < 8; ++s) {
    const auto sc = model::generate_scenario(900 + s, 4);
    const double T = opt::t_upper_bound(sc) * 0.7;
    if (!opt::eta_domain(T, sc)) continue;
    const auto g = opt::solve_eta_star(T, sc, opt::EtaSearch::GoldenSection);
    const auto d = opt::solve_eta_star(T, sc, opt::EtaSearch::DerivativeBisection);
    CHECK(g.eta == doctest::Approx(d.eta).epsilon(1e-6));
    CHECK(g.bandwidth == doctest::Approx(d.bandwidth).epsilon(1e-8));
  }
}

TEST_CASE("check_feasible verdicts") {
  const auto sc = toy_two_user(1e6);

  SUBCASE("ample bandwidth is feasible") {
    auto rich = toy_two_user(1e15);
    const auto rep = opt::check_feasible(100.0, rich);
    CHECK(rep.feasible);
    CHECK(rep.required_bandwidth <= rich.net.bandwidth);
    REQUIRE(rep.eta_domain.has_value());
    CHECK(rep.eta_domain->contains(rep.eta_star));
  }
  SUBCASE("below the pure-computation bound is infeasible") {
    // budget below a * A_1/f even at the best eta
    const auto rep = opt::check_feasible(1.0, sc);
    CHECK_FALSE(rep.feasible);
    CHECK(std::isinf(rep.required_bandwidth));
    CHECK_FALSE(rep.eta_domain.has_value());
  }
  SUBCASE("report invariant: feasible iff bandwidth fits") {
    for (double T : {20.0, 40.0, 60.0, 100.0, 200.0}) {
      const auto rep = opt::check_feasible(T, sc);
      CHECK(rep.feasible == (rep.required_bandwidth <= sc.net.bandwidth));
    }
  }
}

TEST_CASE("monotone feasibility in T") {
  const auto sc = model::generate_scenario(77, 3);
  const double t_ref = opt::minimize_delay(sc).total_delay;
  bool was_feasible = false;
  for (int i = 0; i < 20; ++i) {
    const double T = t_ref * (0.3 + 2.0 * i / 19.0);
    const bool now = opt::check_feasible(T, sc).feasible;
    if (was_feasible) CHECK(now);
    was_feasible = was_feasible || now;
  }
  CHECK(was_feasible);
}

TEST_CASE("t_upper_bound formula and witness feasibility") {
  SUBCASE("single user closed form") {
    const auto sc = symmetric_scenario(1);
    const auto& u = sc.users[0];
    const double a = sc.derived.a;
    const double snr = u.gain * u.p_max / (sc.net.noise_psd * sc.net.bandwidth);
    const double expected =
        2.0 * a * sc.derived.workload[0] / u.f_max +
        2.0 * a * sc.net.upload_bits /
            (sc.net.bandwidth * std::log2(1.0 + snr));
    CHECK(opt::t_upper_bound(sc) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("symmetric users match the single-user value") {
    const auto one = symmetric_scenario(1);
    const auto four = symmetric_scenario(4, 4.0 * one.net.bandwidth);
    // with K times the bandwidth the per-user share matches, so the bound
    // scales exactly
    CHECK(opt::t_upper_bound(four) ==
          doctest::Approx(opt::t_upper_bound(one)).epsilon(1e-12));
  }
  SUBCASE("the bound is feasible on random scenarios") {
    for (int s = 0; s < 5; ++s) {
      const auto sc = model::generate_scenario(50 + s, 6);
      CHECK(opt::check_feasible(opt::t_upper_bound(sc) * (1.0 + 1e-6), sc)
                .feasible);
    }
  }
  SUBCASE("stock scenario value against direct evaluation") {
    const auto sc = model::generate_scenario(0, 5);
    double expected = 0.0;
    for (std::size_t k = 0; k < sc.users.size(); ++k) {
      const auto& u = sc.users[k];
      const double term =
          2.0 * sc.derived.a * sc.derived.workload[k] / u.f_max +
          2.0 * sc.derived.a * 5.0 * sc.net.upload_bits /
              (sc.net.bandwidth *
               std::log2(1.0 + u.gain * u.p_max * 5.0 /
                                   (sc.net.noise_psd * sc.net.bandwidth)));
      expected = std::max(expected, term);
    }
    CHECK(opt::t_upper_bound(sc) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("minimize_delay solution structure") {
  const auto sc = model::generate_scenario(123, 6);
  const auto al = opt::minimize_delay(sc);

  CHECK(opt::allocation_violations(al, sc).empty());
  CHECK(al.scheme == opt::Scheme::Proposed);
  CHECK_FALSE(al.approximate_baseline);
  CHECK(al.solver.final_bracket_width / al.total_delay <= 1e-3);

  SUBCASE("every user exactly meets the total delay") {
    for (const double t : al.per_user_delay)
      CHECK(t == doctest::Approx(al.total_delay).epsilon(1e-9));
  }
  SUBCASE("doubling the bandwidth never increases the delay") {
    auto wide = sc;
    wide.net.bandwidth *= 2.0;
    CHECK(opt::minimize_delay(wide).total_delay <=
          al.total_delay * (1.0 + 1e-9));
  }
  SUBCASE("symmetric scenarios split the bandwidth evenly") {
    const auto sym = symmetric_scenario(4);
    const auto sal = opt::minimize_delay(sym);
    for (const double b : sal.bandwidth)
      CHECK(b == doctest::Approx(sal.bandwidth[0]).epsilon(1e-9));
  }
}

TEST_CASE("baselines relate to the proposed scheme as restrictions") {
  const auto sc = model::generate_scenario(321, 8);
  const auto prop = opt::minimize_delay(sc, 1e-8);
  const auto eb = opt::baseline_eb_fdma(sc);
  const auto fe = opt::baseline_fe_fdma(sc);
  const auto td = opt::baseline_tdma(sc);

  CHECK(opt::allocation_violations(eb, sc).empty());
  CHECK(opt::allocation_violations(fe, sc).empty());
  CHECK(opt::allocation_violations(td, sc).empty());

  CHECK(prop.total_delay <= eb.total_delay * (1.0 + 1e-6));
  CHECK(prop.total_delay <= fe.total_delay * (1.0 + 1e-6));
  CHECK(fe.eta == 0.5);
  CHECK(td.approximate_baseline);
  CHECK_FALSE(eb.approximate_baseline);

  // equal bandwidth shares by construction
  for (const double b : eb.bandwidth)
    CHECK(b == doctest::Approx(sc.net.bandwidth / 8.0));
}

TEST_CASE("all schemes coincide for a single user") {
  const auto sc = model::generate_scenario(55, 1);
  const double prop = opt::minimize_delay(sc, 1e-8).total_delay;
  const double eb = opt::baseline_eb_fdma(sc).total_delay;
  const double td = opt::baseline_tdma(sc).total_delay;
  CHECK(eb == doctest::Approx(td).epsilon(1e-10));
  CHECK(prop == doctest::Approx(eb).epsilon(1e-6));
}

TEST_CASE("stock scenario regression values") {
  // Pinned from the first trusted run at the stock defaults, seed 0, K=50.
  const auto sc = model::generate_scenario(0, 50);
  CHECK(opt::minimize_delay(sc).total_delay ==
        doctest::Approx(33.49405103374005).epsilon(1e-9));
  CHECK(opt::baseline_eb_fdma(sc).total_delay ==
        doctest::Approx(38.439042484238129).epsilon(1e-9));
  CHECK(opt::baseline_fe_fdma(sc).total_delay ==
        doctest::Approx(33.686767092622318).epsilon(1e-9));
  CHECK(opt::baseline_tdma(sc).total_delay ==
        doctest::Approx(46.022553879068838).epsilon(1e-9));
}

TEST_CASE("inner objective convexity on a fine grid") {
  const auto sc = model::generate_scenario(31, 5);
  const double T = opt::minimize_delay(sc).total_delay * 1.5;
  const auto dom = opt::eta_domain(T, sc);
  REQUIRE(dom.has_value());
  constexpr int n = 1000;
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i)
    f[static_cast<std::size_t>(i)] = opt::total_required_bandwidth(
        dom->lo + dom->width() * (i + 0.5) / n, T, sc);
  for (int i = 1; i + 1 < n; ++i) {
    const double scale =
        std::max({std::abs(f[i - 1]), std::abs(f[i]), std::abs(f[i + 1])});
    CHECK(f[i - 1] - 2.0 * f[i] + f[i + 1] >= -1e-6 * scale);
  }
}

TEST_CASE("allocation_violations flags corrupted solutions") {
  const auto sc = model::generate_scenario(9, 3);
  auto al = opt::minimize_delay(sc);
  REQUIRE(opt::allocation_violations(al, sc).empty());

  auto bad = al;
  bad.bandwidth[0] = sc.net.bandwidth * 2.0;
  CHECK_FALSE(opt::allocation_violations(bad, sc).empty());

  bad = al;
  bad.power[1] = sc.users[1].p_max * 2.0;
  CHECK_FALSE(opt::allocation_violations(bad, sc).empty());

  bad = al;
  bad.transmit_time[2] *= 0.5;  // upload no longer fits
  CHECK_FALSE(opt::allocation_violations(bad, sc).empty());
}

TEST_CASE("scheme names round trip") {
  for (const auto s : {opt::Scheme::Proposed, opt::Scheme::EbFdma,
                       opt::Scheme::FeFdma, opt::Scheme::Tdma})
    CHECK(opt::scheme_from_name(opt::scheme_name(s)) == s);
  CHECK_FALSE(opt::scheme_from_name("nonsense").has_value());
}

}  // TEST_SUITE
