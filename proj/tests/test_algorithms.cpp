// SPDX-License-Identifier: Apache-2.0
//
// Unit tests for the matching / LP solvers and the three pilot design
// algorithms, cross-checked against enumeration and grid oracles.

#include "oracles.hpp"

#include <pilotforge/baselines.hpp>
#include <pilotforge/maxmin.hpp>
#include <pilotforge/nonorth.hpp>
#include <pilotforge/orth.hpp>
#include <pilotforge/solvers.hpp>
#include <pilotforge/validate.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <set>

using namespace pilotforge;
using Catch::Approx;

namespace
{

// objective trace must never move up by more than roundoff
void require_nonincreasing(const std::vector<double> &v, double rel = 1e-10)
{
    double scale = 0.0;
    for (double x : v)
        scale = std::max(scale, std::abs(x));
    for (std::size_t i = 1; i < v.size(); i++)
        REQUIRE(v[i] <= v[i - 1] + rel * scale);
}

void require_nondecreasing(const std::vector<double> &v, double rel = 1e-10)
{
    double scale = 0.0;
    for (double x : v)
        scale = std::max(scale, std::abs(x));
    for (std::size_t i = 1; i < v.size(); i++)
        REQUIRE(v[i] >= v[i - 1] - rel * scale);
}

arma::umat umat_of(std::initializer_list<std::initializer_list<arma::uword>> rows)
{
    arma::umat out(rows.size(), rows.begin()->size());
    std::size_t i = 0;
    for (const auto &row : rows)
    {
        std::size_t j = 0;
        for (arma::uword x : row)
            out(i, j++) = x;
        i++;
    }
    return out;
}

} // namespace

TEST_CASE("maximum-weight matching: hand cases and enumeration")
{
    arma::mat one(1, 1);
    one(0, 0) = 5.0;
    AssignmentResult r1 = hungarian_max(one);
    REQUIRE(r1.total == 5.0);
    REQUIRE(r1.row_to_col == std::vector<std::size_t>{0});

    arma::mat two = {{3.0, 1.0}, {2.0, 4.0}};
    AssignmentResult r2 = hungarian_max(two);
    REQUIRE(r2.total == Approx(7.0).margin(1e-12));
    REQUIRE(r2.row_to_col == (std::vector<std::size_t>{0, 1}));

    // ties resolve to the lexicographically smallest column sequence
    arma::mat flat(2, 3, arma::fill::ones);
    AssignmentResult rt = hungarian_max(flat);
    REQUIRE(rt.row_to_col == (std::vector<std::size_t>{0, 1}));

    StreamRng rng(61, stream::fuzz);
    for (int rep = 0; rep < 20; rep++)
    {
        std::size_t K = 1 + rng.below(3), tau = K + rng.below(1 + 7 - K);
        arma::mat w(K, tau);
        for (auto &x : w)
            x = rng.uniform(-2.0, 5.0);
        AssignmentResult got = hungarian_max(w);
        REQUIRE(got.total == Approx(oracle::enumerate_matching(w)).epsilon(1e-9).margin(1e-9));
        std::set<std::size_t> used(got.row_to_col.begin(), got.row_to_col.end());
        REQUIRE(used.size() == K); // injective
        double resum = 0.0;
        for (std::size_t i = 0; i < K; i++)
            resum += w(i, got.row_to_col[i]);
        REQUIRE(resum == Approx(got.total).margin(1e-12));
    }

    arma::mat square(5, 5);
    StreamRng rng2(62, stream::fuzz);
    for (auto &x : square)
        x = rng2.uniform(0.0, 1.0);
    REQUIRE(hungarian_max(square).total ==
            Approx(oracle::enumerate_matching(square)).epsilon(1e-9));

    REQUIRE_THROWS_AS(hungarian_max(arma::mat(3, 2, arma::fill::ones)), std::invalid_argument);
}

TEST_CASE("bounded simplex: hand programs, random programs, status codes")
{
    // maximize t subject to t <= 1 and t <= 2
    {
        arma::vec c = {1.0};
        arma::mat A(2, 1);
        A(0, 0) = 1.0;
        A(1, 0) = 1.0;
        arma::vec b = {1.0, 2.0}, lo = {-10.0}, hi = {10.0};
        LpResult r = simplex_solve(c, A, b, lo, hi);
        REQUIRE(r.status == LpStatus::Optimal);
        REQUIRE(r.objective == Approx(1.0).margin(1e-10));
    }

    // pure box problem (inert row): optimum at the upper corner
    {
        arma::vec c = {2.0, 1.0};
        arma::mat A(1, 2, arma::fill::zeros);
        arma::vec b = {1.0}, lo = {0.0, 0.0}, hi = {3.0, 5.0};
        LpResult r = simplex_solve(c, A, b, lo, hi);
        REQUIRE(r.status == LpStatus::Optimal);
        REQUIRE(r.x(0) == Approx(3.0).margin(1e-10));
        REQUIRE(r.x(1) == Approx(5.0).margin(1e-10));
    }

    // maximize x1 + 2 x2 subject to x1 + x2 <= 3, box [0,2]^2 -> 5 at (1,2)
    {
        arma::vec c = {1.0, 2.0};
        arma::mat A(1, 2, arma::fill::ones);
        arma::vec b = {3.0}, lo = {0.0, 0.0}, hi = {2.0, 2.0};
        LpResult r = simplex_solve(c, A, b, lo, hi);
        REQUIRE(r.status == LpStatus::Optimal);
        REQUIRE(r.objective == Approx(5.0).margin(1e-10));
        REQUIRE(r.x(0) == Approx(1.0).margin(1e-10));
        REQUIRE(r.x(1) == Approx(2.0).margin(1e-10));
    }

    // unbounded direction
    {
        arma::vec c = {1.0};
        arma::mat A(1, 1, arma::fill::zeros);
        arma::vec b = {1.0}, lo = {0.0};
        arma::vec hi = {std::numeric_limits<double>::infinity()};
        REQUIRE(simplex_solve(c, A, b, lo, hi).status == LpStatus::Unbounded);
    }

    // random bounded programs against the vertex-enumeration oracle
    StreamRng rng(63, stream::fuzz);
    int solved = 0;
    for (int rep = 0; rep < 40; rep++)
    {
        std::size_t n = 1 + rng.below(4), m = 1 + rng.below(4);
        arma::vec c(n), b(m), lo(n, arma::fill::zeros), hi(n);
        arma::mat A(m, n);
        for (auto &x : c)
            x = rng.uniform(-1.0, 2.0);
        for (auto &x : A)
            x = rng.uniform(-1.0, 1.5);
        for (auto &x : b)
            x = rng.uniform(0.5, 3.0); // feasible at x = 0
        for (auto &x : hi)
            x = rng.uniform(0.5, 2.5);
        double best;
        if (!oracle::lp_vertex_oracle(c, A, b, lo, hi, best))
            continue;
        LpResult r = simplex_solve(c, A, b, lo, hi);
        REQUIRE(r.status == LpStatus::Optimal);
        REQUIRE(r.objective == Approx(best).epsilon(1e-7).margin(1e-7));
        REQUIRE((A * r.x - b).max() <= 1e-9);
        REQUIRE(r.x.min() >= -1e-12);
        REQUIRE((r.x - hi).max() <= 1e-12);
        solved++;
    }
    REQUIRE(solved >= 30);
}

TEST_CASE("per-pilot candidate power: closed form and dominance")
{
    REQUIRE(candidate_power(-1.0, 2.0, 10.0) == 0.0);
    REQUIRE(candidate_power(0.0, 2.0, 10.0) == 0.0);
    REQUIRE(candidate_power(1.0, 0.0, 10.0) == 10.0); // vanishing quadratic term
    REQUIRE(candidate_power(1.0, 0.5, 10.0) == Approx(4.0).margin(1e-14));
    REQUIRE(candidate_power(3.0, 0.5, 10.0) == 10.0); // clamped at the cap

    StreamRng rng(64, stream::fuzz);
    for (int rep = 0; rep < 20; rep++)
    {
        double A = rng.uniform(0.01, 3.0), B = rng.uniform(0.01, 3.0);
        double Pmax = rng.uniform(0.5, 20.0);
        double p = candidate_power(A, B, Pmax);
        double w = candidate_weight(p, A, B);
        for (int g = 0; g <= 1000; g++)
        {
            double q = Pmax * double(g) / 1000.0;
            REQUIRE(w >= candidate_weight(q, A, B) - 1e-12);
        }
    }
}

TEST_CASE("assignment steps: reuse rules and tie breaking")
{
    NetworkInstance inst = generate(small_config(2, 2, 2, 3, false, 71));
    arma::mat weight(4, 3, arma::fill::ones);
    weight(0, 2) = 2.0; // user (0,0) prefers pilot 2
    weight(1, 2) = 3.0; // user (0,1) prefers pilot 2 even more

    arma::umat lin = linear_search_step(inst, weight);
    REQUIRE(lin(0, 0) == 2);
    REQUIRE(lin(0, 1) == 2); // linear search may reuse inside the cell
    REQUIRE(lin(1, 0) == 0); // flat rows tie-break to the lowest pilot
    REQUIRE(lin(1, 1) == 0);

    arma::umat hun = matching_step(inst, weight);
    REQUIRE(hun(0, 1) == 2); // matching keeps the cell distinct, user 1 wins the contest
    REQUIRE(hun(0, 0) != hun(0, 1));
    REQUIRE(hun(1, 0) != hun(1, 1));

    // the matched surrogate total never exceeds the unconstrained row maxima
    StreamRng rng(72, stream::fuzz);
    for (int rep = 0; rep < 10; rep++)
    {
        arma::mat w(4, 3);
        for (auto &x : w)
            x = rng.uniform(-1.0, 2.0);
        arma::umat a = matching_step(inst, w);
        arma::umat b = linear_search_step(inst, w);
        double ta = 0.0, tb = 0.0;
        for (std::size_t l = 0; l < 2; l++)
            for (std::size_t k = 0; k < 2; k++)
            {
                ta += w(user_index(l, k, 2), a(l, k));
                tb += w(user_index(l, k, 2), b(l, k));
            }
        REQUIRE(ta <= tb + 1e-12);
    }
}

TEST_CASE("budgeted quadratic maximization")
{
    StreamRng rng(65, stream::fuzz);
    for (int rep = 0; rep < 25; rep++)
    {
        std::size_t n = 1 + rng.below(5);
        arma::cx_mat G = random_hpd(rng, n);
        arma::cx_vec a = random_cx_vec(rng, n);
        double budget = rng.uniform(0.05, 4.0);
        arma::cx_vec phi = detail::budgeted_quadratic_max(G, a, budget);
        double e = std::real(arma::cdot(phi, phi));
        REQUIRE(e <= budget * (1.0 + 1e-7));
        auto value = [&](const arma::cx_vec &x) {
            return 2.0 * std::real(arma::cdot(a, x)) - std::real(arma::cdot(x, G * x));
        };
        double v = value(phi);
        if (e < budget * (1.0 - 1e-6)) // interior solution: stationarity
            REQUIRE(arma::norm(G * phi - a, 2) < 1e-8 * (1.0 + arma::norm(a, 2)));
        for (int probe = 0; probe < 100; probe++)
        {
            arma::cx_vec q = random_cx_vec(rng, n);
            q *= std::sqrt(budget * rng.uniform()) / arma::norm(q);
            REQUIRE(v >= value(q) - 1e-8 * std::max(1.0, std::abs(v)));
        }
    }
}

TEST_CASE("free-pilot design: lone user reaches the floor immediately")
{
    NetworkInstance inst = generate(small_config(1, 1, 6, 3, false, 81));
    arma::mat w(1, 1, arma::fill::ones);
    StreamRng rng(82, stream::baseline);
    PilotConfiguration init = baseline_random(inst, 3, rng);
    NonorthResult r = run_algorithm1(inst, w, init, {});
    double lb = lower_bound_mse(inst, 3, w).weighted_sum;
    REQUIRE(r.trace.objective.back() == Approx(lb).epsilon(1e-9));
    REQUIRE(r.trace.iterations <= 2);
    REQUIRE(r.trace.converged);
}

TEST_CASE("free-pilot design: descent, budget and trace bookkeeping")
{
    StreamRng seeds(83, stream::fuzz);
    for (int rep = 0; rep < 6; rep++)
    {
        std::size_t L = 1 + seeds.below(3), K = 1 + seeds.below(3);
        std::size_t tau = 2 + seeds.below(4);
        NetworkInstance inst = generate(small_config(L, K, 4, tau, false, 800 + rep));
        arma::mat w = make_weights(inst, "unit");
        StreamRng rng(810 + rep, stream::baseline);
        PilotConfiguration init = baseline_random(inst, tau, rng);
        Algo1Options opts;
        opts.update = (rep % 2 == 0) ? PilotUpdate::lagrange : PilotUpdate::scaled;
        opts.max_iters = 60;
        NonorthResult r = run_algorithm1(inst, w, init, opts);

        require_nonincreasing(r.trace.objective);
        REQUIRE(r.trace.objective.size() == r.trace.iterations + 1);
        REQUIRE(r.trace.option == ((rep % 2 == 0) ? "lagrange" : "scaled"));
        REQUIRE(r.trace.objective.front() ==
                Approx(mse_uncorrelated(inst, init, w).weighted_sum).epsilon(1e-12));
        REQUIRE(r.trace.objective.back() ==
                Approx(mse_uncorrelated(inst, r.pilots, w).weighted_sum).epsilon(1e-12));

        const double budget = double(tau) * inst.config.max_power_mw;
        arma::cx_mat seqs = r.pilots.materialize();
        for (arma::uword u = 0; u < seqs.n_cols; u++)
        {
            double e = std::real(arma::cdot(seqs.col(u), seqs.col(u)));
            REQUIRE(e <= budget * (1.0 + 1e-9));
        }
        REQUIRE(r.trace.objective.back() >= lower_bound_mse(inst, tau, w).weighted_sum - 1e-12);
    }
}

TEST_CASE("free-pilot design: two-user optimum against a Gram-space grid")
{
    // two cells with one user each; every objective value depends only on
    // (|phi_1|^2, |phi_2|^2, |phi_1^H phi_2|), so a 3-parameter grid finds the
    // global optimum of the tau = 2 design problem
    arma::cube beta(2, 2, 1);
    beta(0, 0, 0) = 1.0;  // BS0 <- its user
    beta(0, 1, 0) = 0.6;  // BS0 <- interferer
    beta(1, 1, 0) = 0.9;
    beta(1, 0, 0) = 0.4;
    const double s2 = 0.5, pmax = 2.0, M = 4.0;
    auto inst = oracle::manual_instance(2, 1, std::size_t(M), beta, s2, pmax);
    const double E = 2.0 * pmax; // tau * P_max

    auto mse_pair = [&](double r1, double r2, double t) {
        arma::cx_mat seqs(2, 2, arma::fill::zeros);
        seqs(0, 0) = r1;
        seqs(0, 1) = t * r2;
        seqs(1, 1) = std::sqrt(std::max(0.0, 1.0 - t * t)) * r2;
        auto cfg = PilotConfiguration::make_arbitrary(2, 1, seqs);
        arma::mat w(2, 1, arma::fill::ones);
        return mse_uncorrelated(inst, cfg, w).weighted_sum;
    };

    double lo[3] = {0.0, 0.0, 0.0};
    double hi[3] = {std::sqrt(E), std::sqrt(E), 1.0};
    double bx[3] = {std::sqrt(E), std::sqrt(E), 0.0};
    double best = mse_pair(bx[0], bx[1], bx[2]);
    const int pts = 9;
    for (int lev = 0; lev < 16; lev++)
    {
        for (int i = 0; i < pts; i++)
            for (int j = 0; j < pts; j++)
                for (int k = 0; k < pts; k++)
                {
                    double x0 = lo[0] + (hi[0] - lo[0]) * i / double(pts - 1);
                    double x1 = lo[1] + (hi[1] - lo[1]) * j / double(pts - 1);
                    double x2 = lo[2] + (hi[2] - lo[2]) * k / double(pts - 1);
                    double v = mse_pair(x0, x1, x2);
                    if (v < best)
                    {
                        best = v;
                        bx[0] = x0;
                        bx[1] = x1;
                        bx[2] = x2;
                    }
                }
        for (int d = 0; d < 3; d++)
        {
            double cap = (d == 2) ? 1.0 : std::sqrt(E);
            double step = (hi[d] - lo[d]) / double(pts - 1);
            lo[d] = std::max(0.0, bx[d] - step);
            hi[d] = std::min(cap, bx[d] + step);
        }
    }

    arma::mat w(2, 1, arma::fill::ones);
    Algo1Options opts;
    opts.rel_tol = 1e-12;
    opts.max_iters = 2000;
    double algo_best = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 3; restart++)
    {
        StreamRng rng(90 + restart, stream::baseline);
        PilotConfiguration init = baseline_random(inst, 2, rng);
        NonorthResult r = run_algorithm1(inst, w, init, opts);
        algo_best = std::min(algo_best, r.trace.objective.back());
    }
    REQUIRE(algo_best == Approx(best).epsilon(1e-6));
}

TEST_CASE("free-pilot design: scaled update hits the budget for its binding user")
{
    NetworkInstance inst = generate(small_config(2, 2, 4, 3, false, 85));
    StreamRng rng(86, stream::baseline);
    PilotConfiguration init = baseline_random(inst, 3, rng);
    arma::mat w = make_weights(inst, "unit");
    arma::cx_mat mu = aux_uncorrelated(inst, init.materialize());
    arma::cx_mat next = update_pilots_scaled(inst, mu, w);
    REQUIRE(next.n_elem > 0);
    const double budget = 3.0 * inst.config.max_power_mw;
    double emax = 0.0;
    for (arma::uword u = 0; u < next.n_cols; u++)
        emax = std::max(emax, std::real(arma::cdot(next.col(u), next.col(u))));
    REQUIRE(emax == Approx(budget).epsilon(1e-9)); // common factor makes one user bind
}

TEST_CASE("free-pilot design: correlated path reduces to the flat one at R = I")
{
    NetworkConfig cfg = small_config(2, 2, 3, 3, true, 87);
    cfg.correlation_magnitude = 0.0;
    NetworkInstance corr = generate(cfg);
    NetworkConfig fcfg = cfg;
    fcfg.correlated = false;
    NetworkInstance flat = generate(fcfg);
    REQUIRE(arma::approx_equal(corr.beta, flat.beta, "absdiff", 0.0));

    arma::mat w = make_weights(flat, "unit");
    StreamRng r1(88, stream::baseline), r2(88, stream::baseline);
    PilotConfiguration i1 = baseline_random(corr, 3, r1);
    PilotConfiguration i2 = baseline_random(flat, 3, r2);

    Algo1Options one;
    one.max_iters = 1;
    NonorthResult a = run_algorithm1_correlated(corr, w, i1, one);
    NonorthResult b = run_algorithm1(flat, w, i2, one);
    arma::cx_mat sa = a.pilots.materialize(), sb = b.pilots.materialize();
    REQUIRE(arma::norm(sa - sb, "fro") < 1e-6 * arma::norm(sb, "fro"));

    Algo1Options full;
    full.max_iters = 50;
    NonorthResult af = run_algorithm1_correlated(corr, w, i1, full);
    NonorthResult bf = run_algorithm1(flat, w, i2, full);
    REQUIRE(af.trace.objective.back() == Approx(bf.trace.objective.back()).epsilon(1e-6));
}

TEST_CASE("free-pilot design: correlated instance descends monotonically")
{
    NetworkConfig cfg = small_config(2, 2, 3, 3, true, 89);
    cfg.correlation_magnitude = 0.6;
    NetworkInstance inst = generate(cfg);
    arma::mat w = make_weights(inst, "unit");
    StreamRng rng(90, stream::baseline);
    PilotConfiguration init = baseline_random(inst, 3, rng);
    Algo1Options opts;
    opts.max_iters = 40;
    NonorthResult r = run_algorithm1_correlated(inst, w, init, opts);
    require_nonincreasing(r.trace.objective);
    REQUIRE(r.trace.objective.back() <= r.trace.objective.front());
    REQUIRE(r.trace.objective.back() ==
            Approx(mse_correlated(inst, r.pilots, w).weighted_sum).epsilon(1e-12));
}

TEST_CASE("orthogonal design: single cell reaches the contamination-free floor")
{
    NetworkInstance inst = generate(small_config(1, 4, 8, 4, false, 91));
    arma::mat w = make_weights(inst, "unit");
    StreamRng rng(92, stream::baseline);
    PilotConfiguration init = baseline_orthogonal(inst, 4, rng);
    OrthResult r = run_algorithm2(inst, w, init, {});
    double lb = lower_bound_mse(inst, 4, w).weighted_sum;
    REQUIRE(r.trace.objective.back() == Approx(lb).epsilon(0.01));
    std::set<arma::uword> used(r.pilots.assignment.begin(), r.pilots.assignment.end());
    REQUIRE(used.size() == 4);
    REQUIRE_NOTHROW(r.pilots.validate(inst.config.max_power_mw, true));
}

TEST_CASE("orthogonal design: descent and contract under both matching rules")
{
    StreamRng seeds(93, stream::fuzz);
    for (int rep = 0; rep < 6; rep++)
    {
        std::size_t L = 1 + seeds.below(3), K = 1 + seeds.below(3);
        std::size_t tau = K + seeds.below(3);
        NetworkInstance inst = generate(small_config(L, K, 4, tau, false, 900 + rep));
        arma::mat w = make_weights(inst, "unit");
        StreamRng rng(910 + rep, stream::baseline);
        PilotConfiguration init = baseline_orthogonal(inst, tau, rng);
        Algo2Options opts;
        opts.matching = (rep % 2 == 0) ? MatchingRule::hungarian : MatchingRule::linear;
        OrthResult r = run_algorithm2(inst, w, init, opts);

        require_nonincreasing(r.trace.objective);
        REQUIRE(r.trace.option == ((rep % 2 == 0) ? "hungarian" : "linear"));
        REQUIRE_NOTHROW(
            r.pilots.validate(inst.config.max_power_mw, opts.matching == MatchingRule::hungarian));
        REQUIRE(r.trace.objective.back() >= lower_bound_mse(inst, tau, w).weighted_sum - 1e-12);
    }
}

TEST_CASE("orthogonal design: single-user cell makes both rules coincide")
{
    NetworkInstance inst = generate(small_config(3, 1, 4, 3, false, 95));
    arma::mat w = make_weights(inst, "unit");
    StreamRng rng(96, stream::baseline);
    PilotConfiguration init = baseline_orthogonal(inst, 3, rng);
    Algo2Options h, lin;
    h.matching = MatchingRule::hungarian;
    lin.matching = MatchingRule::linear;
    OrthResult a = run_algorithm2(inst, w, init, h);
    OrthResult b = run_algorithm2(inst, w, init, lin);
    REQUIRE(arma::all(arma::vectorise(a.pilots.assignment == b.pilots.assignment)));
    REQUIRE(arma::norm(a.pilots.power - b.pilots.power, "fro") < 1e-12);
}

TEST_CASE("orthogonal design: exhaustive optimum on the smallest contested network")
{
    NetworkInstance inst = generate(small_config(2, 2, 6, 2, false, 97));
    arma::mat w = make_weights(inst, "unit");
    arma::cx_mat basis = dft_basis(2);

    double exhaustive = std::numeric_limits<double>::infinity();
    for (const arma::umat &a : oracle::all_assignments(2, 2, 2))
        exhaustive = std::min(exhaustive, oracle::grid_min_mse_power(
                                              inst, basis, a, w, inst.config.max_power_mw));

    double algo = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 4; restart++)
    {
        StreamRng rng(980 + restart, stream::baseline);
        PilotConfiguration init = baseline_orthogonal(inst, 2, rng);
        Algo2Options opts;
        opts.rel_tol = 1e-12;
        // near-tied assignment classes make the alternation contract slowly
        // on this instance; the budget must cover the full creep
        opts.max_iters = 25000;
        algo = std::min(algo, run_algorithm2(inst, w, init, opts).trace.objective.back());
    }
    REQUIRE(algo == Approx(exhaustive).epsilon(1e-6));
}

TEST_CASE("orthogonal design: correlated path reduces to the flat one at R = I")
{
    NetworkConfig cfg = small_config(2, 2, 3, 3, true, 99);
    cfg.correlation_magnitude = 0.0;
    NetworkInstance corr = generate(cfg);
    NetworkConfig fcfg = cfg;
    fcfg.correlated = false;
    NetworkInstance flat = generate(fcfg);
    arma::mat w = make_weights(flat, "unit");
    StreamRng r1(100, stream::baseline), r2(100, stream::baseline);
    PilotConfiguration i1 = baseline_orthogonal(corr, 3, r1);
    PilotConfiguration i2 = baseline_orthogonal(flat, 3, r2);

    OrthResult a = run_algorithm2_correlated(corr, w, i1, {});
    OrthResult b = run_algorithm2(flat, w, i2, {});
    REQUIRE(arma::all(arma::vectorise(a.pilots.assignment == b.pilots.assignment)));
    REQUIRE(arma::norm(a.pilots.power - b.pilots.power, "fro") <
            1e-8 * (1.0 + arma::norm(b.pilots.power, "fro")));
    require_nonincreasing(a.trace.objective);

    NetworkConfig ccfg = small_config(2, 2, 3, 3, true, 101);
    ccfg.correlation_magnitude = 0.5;
    NetworkInstance strong = generate(ccfg);
    StreamRng r3(102, stream::baseline);
    PilotConfiguration i3 = baseline_orthogonal(strong, 3, r3);
    OrthResult c = run_algorithm2_correlated(strong, w, i3, {});
    require_nonincreasing(c.trace.objective);
    // returned powers are floored away from zero, so recomputation can move
    // in the twelfth digit relative to the traced (unfloored) objective
    REQUIRE(c.trace.objective.back() ==
            Approx(mse_correlated(strong, c.pilots, w).weighted_sum).epsilon(1e-9));
}

TEST_CASE("asymptotic SINR map: hand values and rate-report agreement")
{
    // symmetric pair sharing one pilot
    arma::cube beta(2, 2, 1, arma::fill::ones);
    auto inst = oracle::manual_instance(2, 1, 8, beta, 1.0, 5.0);
    arma::umat shared(2, 1, arma::fill::zeros);
    arma::mat xi(2, 1, arma::fill::ones);
    arma::mat s = sinr_map(inst, shared, xi);
    REQUIRE(s(0, 0) == Approx(1.0).margin(1e-14));
    REQUIRE(s(1, 0) == Approx(1.0).margin(1e-14));
    REQUIRE(min_sinr(inst, shared, xi) == Approx(1.0).margin(1e-14));

    // own gain twice the cross gain -> SINR 4 at equal powers
    arma::cube b2(2, 2, 1);
    b2(0, 0, 0) = 2.0;
    b2(0, 1, 0) = 1.0;
    b2(1, 1, 0) = 2.0;
    b2(1, 0, 0) = 1.0;
    auto inst2 = oracle::manual_instance(2, 1, 8, b2, 1.0, 5.0);
    REQUIRE(min_sinr(inst2, shared, xi) == Approx(4.0).margin(1e-12));

    // the map agrees with the rate report evaluated at powers sqrt(xi)
    NetworkInstance net = generate(small_config(2, 2, 4, 2, false, 103));
    arma::umat assign = umat_of({{0, 1}, {1, 0}});
    StreamRng rng(104, stream::fuzz);
    arma::mat power(2, 2);
    for (auto &p : power)
        p = rng.uniform(0.1, net.config.max_power_mw);
    auto cfg = PilotConfiguration::make_orthogonal(2, 2, dft_basis(2), assign, power);
    RateReport rep = rate_asymptotic(net, cfg);
    arma::mat smap = sinr_map(net, assign, arma::square(power));
    for (std::size_t l = 0; l < 2; l++)
        for (std::size_t k = 0; k < 2; k++)
            REQUIRE(rep.per_user(l, k) ==
                    Approx(std::log2(1.0 + smap(l, k))).epsilon(1e-9));
}

TEST_CASE("ratio-iteration power step: saturation cases and grid optimum")
{
    // lambda = 0 decouples the program: everyone at the squared power cap
    NetworkInstance net = generate(small_config(2, 2, 4, 2, false, 105));
    arma::umat assign = umat_of({{0, 1}, {0, 1}});
    arma::mat xi0 = dinkelbach_power_step(net, assign, 0.0);
    double cap = net.config.max_power_mw * net.config.max_power_mw;
    REQUIRE(arma::abs(xi0 - cap).max() < 1e-9 * cap);

    // symmetric two-user tie keeps both at the cap
    arma::cube beta(2, 2, 1, arma::fill::ones);
    auto sym = oracle::manual_instance(2, 1, 8, beta, 1.0, 5.0);
    arma::umat shared(2, 1, arma::fill::zeros);
    arma::mat xi1 = dinkelbach_power_step(sym, shared, 1.0);
    REQUIRE(xi1(0, 0) == Approx(25.0).margin(1e-9));
    REQUIRE(xi1(1, 0) == Approx(25.0).margin(1e-9));

    // interference-free users are pinned at the cap regardless of lambda
    arma::umat split = umat_of({{0}, {1}});
    arma::mat xi2 = dinkelbach_power_step(sym, split, 3.0);
    REQUIRE(xi2(0, 0) == Approx(25.0).margin(1e-12));

    // full inner loop at a fixed assignment against the shrink-grid oracle
    StreamRng seeds(106, stream::fuzz);
    for (int rep = 0; rep < 4; rep++)
    {
        NetworkInstance inst = generate(small_config(2, 2, 4, 2, false, 1060 + rep));
        arma::umat a(2, 2);
        a(0, 0) = 0;
        a(0, 1) = 1;
        a(1, 0) = (rep % 2) ? 1 : 0;
        a(1, 1) = (rep % 2) ? 0 : 1;
        StreamRng prng(1070 + rep, stream::fuzz);
        arma::mat power(2, 2);
        for (auto &p : power)
            p = prng.uniform(0.05, inst.config.max_power_mw);
        PilotConfiguration init =
            PilotConfiguration::make_orthogonal(2, 2, dft_basis(2), a, power);
        Algo3Options opts;
        opts.smart_passes = 0; // keep the assignment fixed
        opts.max_inner = 300;
        opts.rel_tol = 1e-12;
        MaxminResult r = run_algorithm3(inst, init, opts);
        double cap2 = inst.config.max_power_mw * inst.config.max_power_mw;
        double grid = oracle::grid_maxmin_xi(inst, a, cap2);
        REQUIRE(r.min_sinr == Approx(grid).epsilon(1e-3));
        require_nondecreasing(r.lambda_trace, 1e-9);
    }
}

TEST_CASE("worst-user pilot swaps")
{
    // single cell: nobody interferes, nothing changes
    NetworkInstance solo = generate(small_config(1, 3, 4, 3, false, 107));
    arma::umat a0 = umat_of({{0, 1, 2}});
    arma::mat p0(1, 3, arma::fill::value(2.0));
    REQUIRE(arma::all(arma::vectorise(smart_assignment(solo, a0, p0) == a0)));

    // crafted two-cell instance where swapping the worst user's pilot
    // doubles the minimum SINR
    arma::cube beta(2, 2, 2);
    beta(0, 0, 0) = 1.0;
    beta(0, 0, 1) = 1.0;
    beta(0, 1, 0) = 1.0 / std::sqrt(2.0);
    beta(0, 1, 1) = 1.0 / std::sqrt(2.0);
    beta(1, 1, 0) = 1.0;
    beta(1, 1, 1) = 2.0;
    beta(1, 0, 0) = 1.0;
    beta(1, 0, 1) = 1.0 / std::sqrt(2.0);
    auto inst = oracle::manual_instance(2, 2, 4, beta, 1.0, 1.0);
    arma::umat before = umat_of({{0, 1}, {0, 1}});
    arma::mat power(2, 2, arma::fill::ones);
    REQUIRE(min_sinr(inst, before, arma::square(power)) == Approx(1.0).margin(1e-12));
    arma::umat after = smart_assignment(inst, before, power);
    REQUIRE(min_sinr(inst, after, arma::square(power)) == Approx(2.0).margin(1e-12));
    arma::umat expect = umat_of({{0, 1}, {1, 0}});
    REQUIRE(arma::all(arma::vectorise(after == expect)));

    // fuzz: a pass never lowers the minimum SINR
    StreamRng seeds(108, stream::fuzz);
    for (int rep = 0; rep < 8; rep++)
    {
        std::size_t L = 2 + seeds.below(2), K = 1 + seeds.below(3);
        std::size_t tau = K + seeds.below(3);
        NetworkInstance net = generate(small_config(L, K, 4, tau, false, 1080 + rep));
        StreamRng rng(1090 + rep, stream::baseline);
        PilotConfiguration init = baseline_orthogonal(net, tau, rng);
        double mb = min_sinr(net, init.assignment, arma::square(init.power));
        arma::umat out = smart_assignment(net, init.assignment, init.power);
        double ma = min_sinr(net, out, arma::square(init.power));
        REQUIRE(ma >= mb * (1.0 - 1e-9));
    }
}

TEST_CASE("max-min design: saturated, improving, and exhaustively bounded")
{
    // enough pilots for a contamination-free assignment: cap everywhere
    NetworkInstance wide = generate(small_config(2, 2, 4, 4, false, 109));
    arma::umat disjoint = umat_of({{0, 1}, {2, 3}});
    arma::mat full(2, 2, arma::fill::value(wide.config.max_power_mw));
    PilotConfiguration init =
        PilotConfiguration::make_orthogonal(2, 2, dft_basis(4), disjoint, full);
    MaxminResult r = run_algorithm3(wide, init, {});
    REQUIRE(r.min_sinr >= sinr_cap());
    REQUIRE(r.converged);
    RateReport rep = rate_asymptotic(wide, r.pilots);
    REQUIRE(rep.min_rate == rate_cap_bits);

    // contested network: trace rises, final value never beats the global grid
    StreamRng seeds(110, stream::fuzz);
    for (int rep2 = 0; rep2 < 3; rep2++)
    {
        NetworkInstance inst = generate(small_config(2, 2, 4, 2, false, 1100 + rep2));
        StreamRng rng(1110 + rep2, stream::baseline);
        PilotConfiguration binit = baseline_orthogonal(inst, 2, rng);
        Algo3Options opts;
        opts.outer_iters = 2;
        MaxminResult m = run_algorithm3(inst, binit, opts);
        require_nondecreasing(m.lambda_trace, 1e-9);
        REQUIRE(m.min_sinr >=
                min_sinr(inst, binit.assignment, arma::square(binit.power)) * (1.0 - 1e-9));
        REQUIRE_NOTHROW(m.pilots.validate(inst.config.max_power_mw, true));

        double cap2 = inst.config.max_power_mw * inst.config.max_power_mw;
        double global = 0.0;
        for (const arma::umat &a : oracle::all_assignments(2, 2, 2))
            global = std::max(global, oracle::grid_maxmin_xi(inst, a, cap2));
        REQUIRE(m.min_sinr <= global * (1.0 + 1e-3));
    }
}
