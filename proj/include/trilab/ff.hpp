#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace trilab::ff {

enum class ScanStatus { ok, aborted };

inline const char* to_string(ScanStatus s) {
    return s == ScanStatus::ok ? "ok" : "aborted";
}

// default enumeration budget (triple/pair visits) per operation
inline constexpr std::uint64_t kDefaultBudget = 500'000'000ULL;

struct PrimeField {
    std::uint32_t q;
    explicit PrimeField(std::uint32_t q_);  // rejects composites and q < 3
};

std::uint32_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint32_t q);

// Tonelli-Shanks; the returned root is re-checked against a before returning.
std::optional<std::uint32_t> legendre_sqrt(std::uint32_t a, const PrimeField& field);

// Point set in F_q^d, points stored flat (row-major, d residues each),
// deduplicated on construction.
struct FFSubset {
    PrimeField field;
    int d;
    std::vector<std::uint16_t> coords;

    FFSubset(PrimeField f, int d_, std::vector<std::uint16_t> pts);
    std::size_t size() const { return coords.size() / std::size_t(d); }
    const std::uint16_t* point(std::size_t i) const { return &coords[i * std::size_t(d)]; }

    static FFSubset full_space(const PrimeField& f, int d);
    static FFSubset random_subset(const PrimeField& f, int d, std::size_t size, std::uint64_t seed);
};

// ||u - v|| = sum (u_i - v_i)^2 mod q
std::uint32_t ff_norm(const std::uint16_t* u, const std::uint16_t* v, int d, std::uint32_t q);

// Unordered {x,y,z}, pairwise distinct, all three pairwise norms equal.
// Distinct-point triples of norm class 0 go to the separate zero_class bucket;
// total covers the nonzero classes only, so both conventions can be read off.
struct TriangleCensus {
    std::map<std::uint32_t, std::uint64_t> counts_by_side;  // r != 0 only
    std::uint64_t zero_class = 0;
    std::uint64_t total = 0;
    std::uint64_t triples_visited = 0;
    ScanStatus status = ScanStatus::ok;
};

TriangleCensus equilateral_census(const FFSubset& e, std::uint64_t budget = kDefaultBudget);

// Side classes realized by the full space F_q^d (translation-invariance lets
// the first vertex sit at 0, so the scan is over norm buckets, not triples).
struct RealizedClasses {
    std::set<std::uint32_t> classes;  // nonzero r with at least one triangle
    bool zero_class = false;
    ScanStatus status = ScanStatus::ok;
};

RealizedClasses full_space_realized_classes(const PrimeField& field, int d,
                                            std::uint64_t budget = kDefaultBudget);

struct ObstructionReport {
    std::uint32_t q = 0;
    int d = 0;
    bool sqrt3_exists = false;
    bool triangle_exists = false;  // meaningful only when status == ok
    ScanStatus status = ScanStatus::ok;
};

ObstructionReport obstruction_check(const PrimeField& field, int d,
                                    std::uint64_t budget = kDefaultBudget);

struct ThresholdRow {
    std::size_t size = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    double mean_fraction = 0.0;           // realized nonzero classes / realizable
    std::size_t realizable_classes = 0;
    double threshold = 0.0;               // q^{(2/3)d + 1}
    bool above_threshold = false;
    ScanStatus status = ScanStatus::ok;
};

std::vector<ThresholdRow> threshold_experiment(const PrimeField& field, int d,
                                               const std::vector<std::size_t>& sizes,
                                               int trials, std::uint64_t seed,
                                               std::uint64_t budget = kDefaultBudget);

std::vector<std::uint32_t> primes_up_to(std::uint32_t n);

}  // namespace trilab::ff
