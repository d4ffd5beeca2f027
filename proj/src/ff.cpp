#include "trilab/ff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trilab/common.hpp"

namespace trilab::ff {

namespace {

bool is_prime(std::uint32_t n) {
    if (n < 2) return false;
    for (std::uint32_t p = 2; std::uint64_t(p) * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

}  // namespace

PrimeField::PrimeField(std::uint32_t q_) : q(q_) {
    if (q < 3 || !is_prime(q))
        throw std::invalid_argument("PrimeField: q must be an odd prime >= 3, got " +
                                    std::to_string(q_));
    if (q > 8191)
        throw std::invalid_argument("PrimeField: q > 8191 exceeds the desk-scale design");
}

std::uint32_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint32_t q) {
    std::uint64_t acc = 1, b = base % q;
    while (exp) {
        if (exp & 1) acc = acc * b % q;
        b = b * b % q;
        exp >>= 1;
    }
    return std::uint32_t(acc);
}

std::optional<std::uint32_t> legendre_sqrt(std::uint32_t a, const PrimeField& field) {
    const std::uint32_t q = field.q;
    if (a >= q) throw std::invalid_argument("legendre_sqrt: a must be reduced mod q");
    if (a == 0) return 0u;
    if (pow_mod(a, (q - 1) / 2, q) != 1) return std::nullopt;  // Euler criterion

    std::uint32_t x;
    if (q % 4 == 3) {
        x = pow_mod(a, (q + 1) / 4, q);
    } else {
        // Tonelli-Shanks
        std::uint32_t s = 0, qq = q - 1;
        while ((qq & 1) == 0) { qq >>= 1; ++s; }
        std::uint32_t z = 2;
        while (pow_mod(z, (q - 1) / 2, q) == 1) ++z;
        std::uint32_t m = s;
        std::uint32_t c = pow_mod(z, qq, q);
        std::uint32_t t = pow_mod(a, qq, q);
        x = pow_mod(a, (qq + 1) / 2, q);
        while (t != 1) {
            std::uint32_t i = 0;
            std::uint64_t t2 = t;
            while (t2 != 1) { t2 = t2 * t2 % q; ++i; }
            std::uint32_t b = pow_mod(c, 1u << (m - i - 1), q);
            m = i;
            c = std::uint32_t(std::uint64_t(b) * b % q);
            t = std::uint32_t(std::uint64_t(t) * c % q);
            x = std::uint32_t(std::uint64_t(x) * b % q);
        }
    }
    if (std::uint64_t(x) * x % q != a)
        throw std::logic_error("legendre_sqrt: root check failed");
    return x;
}

FFSubset::FFSubset(PrimeField f, int d_, std::vector<std::uint16_t> pts)
    : field(f), d(d_), coords(std::move(pts)) {
    if (d < 1 || d > 8) throw std::invalid_argument("FFSubset: d out of range");
    if (coords.size() % std::size_t(d) != 0)
        throw std::invalid_argument("FFSubset: coordinate count not a multiple of d");
    for (auto c : coords)
        if (c >= field.q) throw std::invalid_argument("FFSubset: coordinate not reduced mod q");
    // dedupe, preserving nothing but the set
    const std::size_t n = size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto cmp = [&](std::size_t i, std::size_t j) {
        return std::lexicographical_compare(point(i), point(i) + d, point(j), point(j) + d);
    };
    std::sort(order.begin(), order.end(), cmp);
    std::vector<std::uint16_t> dedup;
    dedup.reserve(coords.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && std::equal(point(order[k]), point(order[k]) + d, point(order[k - 1])))
            continue;
        dedup.insert(dedup.end(), point(order[k]), point(order[k]) + d);
    }
    coords = std::move(dedup);
}

FFSubset FFSubset::full_space(const PrimeField& f, int d) {
    double count = std::pow(double(f.q), d);
    if (count > 2e6) throw std::invalid_argument("FFSubset::full_space: q^d too large");
    const std::size_t n = std::size_t(count + 0.5);
    std::vector<std::uint16_t> pts(n * std::size_t(d));
    std::vector<std::uint16_t> cur(d, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(cur.begin(), cur.end(), &pts[i * d]);
        for (int k = d - 1; k >= 0; --k) {
            if (++cur[k] < f.q) break;
            cur[k] = 0;
        }
    }
    return FFSubset(f, d, std::move(pts));
}

FFSubset FFSubset::random_subset(const PrimeField& f, int d, std::size_t size, std::uint64_t seed) {
    double count = std::pow(double(f.q), d);
    if (count > 2e7) throw std::invalid_argument("FFSubset::random_subset: q^d too large");
    const std::size_t n = std::size_t(count + 0.5);
    if (size > n) throw std::invalid_argument("FFSubset::random_subset: size > q^d");
    // partial Fisher-Yates over point indices, without replacement
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = std::uint32_t(i);
    Rng rng(seed);
    std::vector<std::uint16_t> pts(size * std::size_t(d));
    for (std::size_t i = 0; i < size; ++i) {
        std::size_t j = i + std::size_t(rng.below(n - i));
        std::swap(idx[i], idx[j]);
        std::uint32_t v = idx[i];
        for (int k = d - 1; k >= 0; --k) {
            pts[i * d + k] = std::uint16_t(v % f.q);
            v /= f.q;
        }
    }
    return FFSubset(f, d, std::move(pts));
}

std::uint32_t ff_norm(const std::uint16_t* u, const std::uint16_t* v, int d, std::uint32_t q) {
    std::uint64_t acc = 0;
    for (int i = 0; i < d; ++i) {
        std::uint32_t diff = (u[i] + q - v[i]) % q;
        acc += std::uint64_t(diff) * diff;
    }
    return std::uint32_t(acc % q);
}

TriangleCensus equilateral_census(const FFSubset& e, std::uint64_t budget) {
    TriangleCensus out;
    const std::size_t n = e.size();
    if (n < 3) return out;
    const std::uint64_t visits = std::uint64_t(n) * (n - 1) * (n - 2) / 6;
    if (visits > budget) {
        out.status = ScanStatus::aborted;
        return out;
    }
    const std::uint32_t q = e.field.q;
    const int d = e.d;
    std::vector<std::uint32_t> normtab(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            std::uint32_t r = ff_norm(e.point(i), e.point(j), d, q);
            normtab[i * n + j] = r;
            normtab[j * n + i] = r;
        }
    std::vector<std::uint64_t> counts(q, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t* row_i = &normtab[i * n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::uint32_t r = row_i[j];
            const std::uint32_t* row_j = &normtab[j * n];
            for (std::size_t k = j + 1; k < n; ++k) {
                if (row_i[k] == r && row_j[k] == r) ++counts[r];
            }
        }
    }
    out.triples_visited = visits;
    out.zero_class = counts[0];
    for (std::uint32_t r = 1; r < q; ++r)
        if (counts[r]) {
            out.counts_by_side[r] = counts[r];
            out.total += counts[r];
        }
    return out;
}

RealizedClasses full_space_realized_classes(const PrimeField& field, int d,
                                            std::uint64_t budget) {
    RealizedClasses out;
    const std::uint32_t q = field.q;
    double count = std::pow(double(q), d);
    if (count > 2e7) {
        out.status = ScanStatus::aborted;
        return out;
    }
    const std::size_t n = std::size_t(count + 0.5);
    // bucket points by norm; a triangle {0, u, v} with side r needs
    // u, v in the r-bucket and ||u - v|| = r
    std::vector<std::vector<std::uint32_t>> bucket(q);
    std::vector<std::uint16_t> pt(d);
    std::vector<std::uint16_t> zero(d, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t v = std::uint32_t(i);
        for (int k = d - 1; k >= 0; --k) {
            pt[k] = std::uint16_t(v % q);
            v /= q;
        }
        bucket[ff_norm(pt.data(), zero.data(), d, q)].push_back(std::uint32_t(i));
    }
    std::uint64_t visited = 0;
    auto decode = [&](std::uint32_t idx, std::uint16_t* p) {
        for (int k = d - 1; k >= 0; --k) {
            p[k] = std::uint16_t(idx % q);
            idx /= q;
        }
    };
    std::vector<std::uint16_t> pu(d), pv(d);
    for (std::uint32_t r = 0; r < q; ++r) {
        const auto& B = bucket[r];
        bool found = false;
        for (std::size_t a = 0; a < B.size() && !found; ++a) {
            decode(B[a], pu.data());
            if (r == 0 && B[a] == 0) continue;  // skip the origin itself for r = 0
            for (std::size_t b = a + 1; b < B.size() && !found; ++b) {
                if (++visited > budget) {
                    out.status = ScanStatus::aborted;
                    return out;
                }
                decode(B[b], pv.data());
                if (ff_norm(pu.data(), pv.data(), d, q) == r) found = true;
            }
        }
        if (found) {
            if (r == 0) out.zero_class = true;
            else out.classes.insert(r);
        }
    }
    return out;
}

ObstructionReport obstruction_check(const PrimeField& field, int d, std::uint64_t budget) {
    ObstructionReport rep;
    rep.q = field.q;
    rep.d = d;
    rep.sqrt3_exists = legendre_sqrt(3 % field.q, field).has_value();
    auto rc = full_space_realized_classes(field, d, budget);
    rep.status = rc.status;
    rep.triangle_exists = !rc.classes.empty();
    return rep;
}

std::vector<ThresholdRow> threshold_experiment(const PrimeField& field, int d,
                                               const std::vector<std::size_t>& sizes,
                                               int trials, std::uint64_t seed,
                                               std::uint64_t budget) {
    if (trials < 1) throw std::invalid_argument("threshold_experiment: trials < 1");
    auto realizable = full_space_realized_classes(field, d, budget);
    std::vector<ThresholdRow> rows;
    const double thr = std::pow(double(field.q), (2.0 / 3.0) * d + 1.0);
    for (std::size_t size : sizes) {
        ThresholdRow row;
        row.size = size;
        row.trials = trials;
        row.seed = seed;
        row.threshold = thr;
        row.above_threshold = double(size) >= thr;
        row.realizable_classes = realizable.classes.size();
        if (realizable.status == ScanStatus::aborted || row.realizable_classes == 0) {
            row.status = ScanStatus::aborted;
            rows.push_back(row);
            continue;
        }
        double frac_sum = 0.0;
        for (int t = 0; t < trials; ++t) {
            FFSubset sub = FFSubset::random_subset(field, d, size, seed + std::uint64_t(t));
            auto census = equilateral_census(sub, budget);
            if (census.status == ScanStatus::aborted) {
                row.status = ScanStatus::aborted;
                break;
            }
            std::size_t realized = 0;
            for (auto r : realizable.classes)
                if (census.counts_by_side.count(r)) ++realized;
            frac_sum += double(realized) / double(row.realizable_classes);
        }
        if (row.status == ScanStatus::ok) row.mean_fraction = frac_sum / trials;
        rows.push_back(row);
    }
    return rows;
}

std::vector<std::uint32_t> primes_up_to(std::uint32_t n) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t q = 2; q <= n; ++q)
        if (is_prime(q)) out.push_back(q);
    return out;
}

}  // namespace trilab::ff
