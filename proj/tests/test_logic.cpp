#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace ceh;
using Element = BooleanLattice::Element;

namespace {

ComplexMatrix proj_z(int sign) {
    ComplexMatrix p(2);
    p(sign > 0 ? 0 : 1, sign > 0 ? 0 : 1) = 1.0;
    return p;
}

ComplexMatrix proj_x(int sign) {
    ComplexMatrix p(2);
    p(0, 0) = p(1, 1) = 0.5;
    p(0, 1) = p(1, 0) = 0.5 * sign;
    return p;
}

Scenario free_spin() {
    ComplexMatrix rho(2);
    rho(0, 0) = 1.0;
    return Scenario(2, ComplexMatrix(2), rho);
}

// Two-time z-chain atoms; the bit order is (z+,z+), (z+,z-), (z-,z+), (z-,z-).
std::vector<TensorHistory> z_chain_atoms() {
    std::vector<TensorHistory> atoms;
    for (const int a : {+1, -1})
        for (const int b : {+1, -1})
            atoms.push_back(to_tensor_history(
                HomogeneousEffectHistory(2, {{1.0, proj_z(a)}, {2.0, proj_z(b)}})));
    return atoms;
}

DecoherenceContext z_context() { return {free_spin(), WeightKind::extended}; }

ComplexMatrix rank_one(const std::vector<Complex>& v) {
    ComplexMatrix m(v.size());
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) m(r, c) = v[r] * std::conj(v[c]);
    return m;
}

}  // namespace

TEST_CASE("lattice construction enumerates all subsets of the atoms") {
    const BooleanLattice lat(z_chain_atoms());
    CHECK(lat.atom_count() == 4);
    CHECK(lat.element_count() == 16);
    CHECK(lat.full() == 15);
    CHECK(lat.atom_labels() == std::vector<std::string>{"a0", "a1", "a2", "a3"});
    CHECK(lat.support() == std::vector<double>{1.0, 2.0});
    CHECK(lat.value_op(0).frobenius_norm() == 0.0);
    CHECK(distance(lat.value_op(lat.full()), ComplexMatrix::identity(4)) < 1e-14);
    CHECK(distance(lat.atom(1).op(), kron(proj_z(+1), proj_z(-1))) < 1e-14);
}

TEST_CASE("lattice respects custom labels and zero image") {
    BooleanLattice::Options opts;
    opts.labels = {"up", "down"};
    const ComplexMatrix nudge = Complex(0.05, 0.0) * ComplexMatrix::identity(2);
    opts.zero_image = TensorHistory(2, {1.0}, nudge);
    const std::vector<TensorHistory> atoms{
        TensorHistory(2, {1.0}, Complex(0.4, 0.0) * proj_z(+1)),
        TensorHistory(2, {1.0}, Complex(0.4, 0.0) * proj_z(-1))};
    const BooleanLattice lat(atoms, opts);
    CHECK(lat.atom_labels()[0] == "up");
    CHECK(distance(lat.value_op(0), nudge) < 1e-14);
    const ComplexMatrix full = nudge + Complex(0.4, 0.0) * ComplexMatrix::identity(2);
    CHECK(distance(lat.value_op(3), full) < 1e-14);
}

TEST_CASE("lattice construction rejects bad inputs") {
    const ComplexMatrix small = Complex(0.4, 0.0) * proj_z(+1);
    const TensorHistory a(2, {1.0}, small);
    CHECK_THROWS_MATCHES(BooleanLattice({}), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("arity mismatch")));
    CHECK_THROWS_MATCHES(BooleanLattice({a, a}), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("valuation not injective")));
    const TensorHistory big(2, {1.0}, Complex(0.7, 0.0) * ComplexMatrix::identity(2));
    CHECK_THROWS_MATCHES(BooleanLattice({big, big}), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("atoms not summable")));
    const TensorHistory other_dim(3, {1.0}, Complex(0.4, 0.0) * ComplexMatrix::identity(3));
    CHECK_THROWS_MATCHES(BooleanLattice({a, other_dim}), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("dimension mismatch")));
    BooleanLattice::Options bad_count;
    bad_count.labels = {"only"};
    CHECK_THROWS_MATCHES(
        BooleanLattice({a, TensorHistory(2, {1.0}, Complex(0.4, 0.0) * proj_z(-1))}, bad_count),
        Error,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("arity mismatch")));
}

TEST_CASE("lattice caps the atom count and the table storage") {
    std::vector<TensorHistory> many;
    for (int i = 0; i < 11; ++i)
        many.emplace_back(2, std::vector<double>{1.0},
                          Complex(0.01 * (i + 1), 0.0) * proj_z(+1));
    CHECK_THROWS_MATCHES(BooleanLattice(many), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("too many atoms")));

    const std::vector<double> support{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<TensorHistory> wide;
    for (int i = 0; i < 10; ++i) {
        ComplexMatrix unit(256);
        unit(i, i) = 1.0;
        wide.emplace_back(2, support, unit);
    }
    CHECK_THROWS_MATCHES(BooleanLattice(wide), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("too many atoms")));
}

TEST_CASE("element bounds are enforced") {
    const BooleanLattice lat(z_chain_atoms());
    CHECK_THROWS_MATCHES(lat.value_op(16), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("not a lattice element")));
    CHECK_THROWS_MATCHES(lattice_weight(z_context(), lat, 0, 99), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("not a lattice element")));
}

TEST_CASE("lattice weights reproduce the chain fixture") {
    const BooleanLattice lat(z_chain_atoms());
    const DecoherenceContext ctx = z_context();
    CHECK(std::abs(lattice_weight(ctx, lat, 1, 1) - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(lattice_weight(ctx, lat, 2, 2)) < 1e-12);
    CHECK(std::abs(lattice_weight(ctx, lat, 1, 2)) < 1e-12);
    CHECK(std::abs(lattice_weight(ctx, lat, lat.full(), lat.full()) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("canonical valuations are admissible") {
    const BooleanLattice lat(z_chain_atoms());
    const AdmissibilityReport rep = check_admissible(z_context(), lat);
    CHECK(rep.admissible);
    CHECK(rep.valuation_condition_ok);
    CHECK(rep.injective);
    CHECK(rep.weights_match);
    CHECK(rep.valuation_issues.empty());
    CHECK(rep.injectivity_issues.empty());
    CHECK(rep.weight_issues.empty());
}

TEST_CASE("a custom override equal to the canonical image stays admissible") {
    const BooleanLattice lat(z_chain_atoms());
    const std::map<Element, TensorHistory> custom{{Element{1}, lat.value(1)}};
    const AdmissibilityReport rep = check_admissible(z_context(), lat, custom);
    CHECK(rep.admissible);
}

TEST_CASE("a rescaled atom image breaks admissibility") {
    const BooleanLattice lat(z_chain_atoms());
    const TensorHistory shrunk(2, {1.0, 2.0},
                               Complex(0.9, 0.0) * kron(proj_z(+1), proj_z(+1)));
    const AdmissibilityReport rep = check_admissible(z_context(), lat, {{Element{1}, shrunk}});
    CHECK_FALSE(rep.admissible);
    CHECK_FALSE(rep.valuation_condition_ok);
    REQUIRE_FALSE(rep.valuation_issues.empty());
    bool found_residual = false;
    for (const LatticePairIssue& issue : rep.valuation_issues)
        if (issue.defined && std::abs(issue.value - 0.1) < 1e-12) found_residual = true;
    CHECK(found_residual);
    CHECK_FALSE(rep.weights_match);
    bool found_weight = false;
    for (const LatticePairIssue& issue : rep.weight_issues)
        if (issue.a == 1 && issue.b == 1 && std::abs(issue.value - 0.19) < 1e-12) found_weight = true;
    CHECK(found_weight);
}

TEST_CASE("an override colliding with another image breaks injectivity") {
    const BooleanLattice lat(z_chain_atoms());
    const AdmissibilityReport rep = check_admissible(z_context(), lat, {{Element{1}, lat.value(2)}});
    CHECK_FALSE(rep.injective);
    REQUIRE_FALSE(rep.injectivity_issues.empty());
    CHECK(rep.injectivity_issues.front().value < 1e-12);
}

TEST_CASE("missing order differences are flagged as undefined") {
    const BooleanLattice lat(z_chain_atoms());
    const TensorHistory tiny(2, {1.0, 2.0}, Complex(0.5, 0.0) * kron(proj_z(+1), proj_z(+1)));
    const AdmissibilityReport rep = check_admissible(z_context(), lat, {{Element{3}, tiny}});
    CHECK_FALSE(rep.valuation_condition_ok);
    bool undefined_seen = false;
    for (const LatticePairIssue& issue : rep.valuation_issues)
        if (!issue.defined) undefined_seen = true;
    CHECK(undefined_seen);
}

TEST_CASE("the chain lattice is consistent with zero residual") {
    const BooleanLattice lat(z_chain_atoms());
    const ConsistencyReport rep = check_consistent(z_context(), lat);
    CHECK(rep.consistent);
    CHECK(rep.worst < 1e-13);
    CHECK(rep.normalization == Catch::Approx(1.0).margin(1e-12));
    CHECK(rep.violations.empty());
    CHECK(check_consistent(z_context(), lat, 1e-9, true).consistent);
}

TEST_CASE("interference atoms fail consistency with the known residual") {
    std::vector<TensorHistory> atoms;
    for (const int sign : {+1, -1})
        atoms.push_back(to_tensor_history(
            HomogeneousEffectHistory(2, {{1.0, proj_x(sign)}, {2.0, proj_z(+1)}})));
    const BooleanLattice lat(atoms);
    const ConsistencyReport rep = check_consistent(z_context(), lat);
    CHECK_FALSE(rep.consistent);
    CHECK(rep.worst == Catch::Approx(0.25).margin(1e-9));
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].a == 1);
    CHECK(rep.violations[0].b == 2);
}

TEST_CASE("purely imaginary cross terms separate the strict variant") {
    ComplexMatrix rho(3);
    rho(0, 0) = 1.0;
    const Scenario s(3, ComplexMatrix(3), rho);
    const DecoherenceContext ctx{s, WeightKind::extended};
    const double inv = 1.0 / std::sqrt(3.0);
    const Complex omega = std::polar(1.0, 2.0 * 3.14159265358979323846 / 3.0);
    const ComplexMatrix e1 = Complex(0.5, 0.0) * rank_one({inv, inv, inv});
    const ComplexMatrix e2 = Complex(0.5, 0.0) * rank_one({inv, inv * omega, inv * omega});
    const BooleanLattice lat({TensorHistory(3, {1.0}, e1), TensorHistory(3, {1.0}, e2)});

    const Complex cross = lattice_weight(ctx, lat, 1, 2);
    const double expected = 0.25 / (3.0 * std::sqrt(3.0));
    CHECK(std::abs(cross.real()) < 1e-12);
    CHECK(std::abs(cross.imag()) == Catch::Approx(expected).margin(1e-12));

    CHECK(check_consistent(ctx, lat, 1e-6, false).consistent);
    const ConsistencyReport strict = check_consistent(ctx, lat, 1e-6, true);
    CHECK_FALSE(strict.consistent);
    CHECK(strict.worst == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("probabilities on the chain lattice are deterministic") {
    const BooleanLattice lat(z_chain_atoms());
    const DecoherenceContext ctx = z_context();
    CHECK(probability(ctx, lat, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(probability(ctx, lat, 1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(probability(ctx, lat, 2) == Catch::Approx(0.0).margin(1e-12));
    CHECK(probability(ctx, lat, lat.full()) == Catch::Approx(1.0).margin(1e-12));
    double total = 0.0;
    for (std::size_t i = 0; i < lat.atom_count(); ++i)
        total += probability(ctx, lat, Element{1} << i);
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("probability queries refuse inconsistent lattices") {
    std::vector<TensorHistory> atoms;
    for (const int sign : {+1, -1})
        atoms.push_back(to_tensor_history(
            HomogeneousEffectHistory(2, {{1.0, proj_x(sign)}, {2.0, proj_z(+1)}})));
    const BooleanLattice lat(atoms);
    CHECK_THROWS_MATCHES(probability(z_context(), lat, 1), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("inconsistent lattice")));
}

TEST_CASE("probability queries refuse degenerate normalizations") {
    const std::vector<TensorHistory> atoms{
        TensorHistory(2, {1.0}, Complex(0.5, 0.0) * proj_z(-1))};
    const BooleanLattice lat(atoms);
    CHECK_THROWS_MATCHES(probability(z_context(), lat, 1), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("degenerate normalization")));
}

TEST_CASE("implication follows conditional probability one") {
    const BooleanLattice lat(z_chain_atoms());
    const DecoherenceContext ctx = z_context();
    const Element first_up = 0b0011;   // z+ at the first event
    const Element second_up = 0b0101;  // z+ at the second event
    const ImplicationResult fwd = implies(ctx, lat, first_up, second_up);
    CHECK(fwd.holds);
    CHECK(fwd.conditional == Catch::Approx(1.0).margin(1e-12));
    const ImplicationResult miss = implies(ctx, lat, first_up, Element{0b1000});
    CHECK_FALSE(miss.holds);
    CHECK(miss.conditional == Catch::Approx(0.0).margin(1e-12));
    CHECK_THROWS_MATCHES(implies(ctx, lat, Element{0b0010}, second_up), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("conditional undefined")));
}

TEST_CASE("implication can be certified through a common lower bound") {
    const BooleanLattice lat(z_chain_atoms());
    const DecoherenceContext ctx = z_context();
    const ImplicationResult via = implies_via(ctx, lat, 0b0011, 0b0101, 0b0001);
    CHECK(via.holds);
    CHECK(via.conditional == Catch::Approx(1.0).margin(1e-12));
    CHECK_THROWS_MATCHES(implies_via(ctx, lat, 0b0011, 0b0101, 0b0010), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("e3 not a common lower bound")));
}

TEST_CASE("equivalence is two-sided implication") {
    const BooleanLattice lat(z_chain_atoms());
    const DecoherenceContext ctx = z_context();
    CHECK(equivalent(ctx, lat, 0b0011, 0b0101));
    CHECK_FALSE(equivalent(ctx, lat, 0b0011, 0b1100));
}
