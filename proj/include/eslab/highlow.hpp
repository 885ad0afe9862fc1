#pragma once

#include <map>
#include <optional>

#include "eslab/expsum.hpp"

namespace eslab {

// ---------------------------------------------------------------------------
// Scale ladder and pruning parameters
// ---------------------------------------------------------------------------

/// delta_j = (log N)^{-c j} rounded down to the partition lattice, clamped
/// at 1/N, deduplicated. deltas[0] = 1, deltas[J] in [1/N, 2/N].
struct ScaleLadder {
    int64_t N = 0;
    double c = 1.0;
    int prime = 2;
    std::vector<double> deltas;
    std::vector<int> levels;  // levels[j] = log_p(1/deltas[j])

    int J() const { return int(deltas.size()) - 1; }
    /// w_j = N^{-2} delta_j^{-1}, the small wave-envelope scales.
    double w_scale(int j) const { return 1.0 / (double(N) * double(N) * deltas[std::size_t(j)]); }
};

inline ScaleLadder build_ladder(int64_t N, double c, int prime = 2) {
    require(N >= 16, "ladder needs N >= 16 so that log log N > 0");
    require(c > 0.0, "ladder exponent c must be positive (the ladder must descend)");
    {
        int64_t t = N;
        while (t % prime == 0) t /= prime;
        require(t == 1, "N must be a power of p");
    }
    ScaleLadder lad;
    lad.N = N;
    lad.c = c;
    lad.prime = prime;
    const double logN = std::log(double(N));
    const double floor_delta = 1.0 / double(N);
    for (int j = 0;; ++j) {
        double raw = std::pow(logN, -c * double(j));
        double d = std::max(round_down_pow(prime, raw), floor_delta);
        if (lad.deltas.empty() || d < lad.deltas.back()) lad.deltas.push_back(d);
        if (d <= floor_delta * (1.0 + 1e-12)) break;  // delta_J = 1/N reached
        require(j < 4096, "ladder failed to descend");
    }
    for (double d : lad.deltas) lad.levels.push_back(log2_exact(int64_t(std::llround(1.0 / d))) / log2_exact(prime));
    // spacing invariant: consecutive ratios at most 2 (log N)^c
    for (std::size_t j = 0; j + 1 < lad.deltas.size(); ++j)
        require(lad.deltas[j] / lad.deltas[j + 1] <= 2.0 * std::pow(logN, c) + 1e-9,
                "ladder spacing invariant violated");
    return lad;
}

struct PruningParams {
    double epsilon = 0.0;  // (log N)^{-1}
    double tilde_c = 0.0;
    double lambda = 0.0;  // (log N)^{tilde_c} * ||g_J||_inf / alpha
    double alpha = 0.0;
};

inline PruningParams make_pruning_params(const ScaleLadder& lad, double alpha, double gJ_inf,
                                         double tilde_c = -1.0) {
    require(alpha > 0.0, "alpha must be positive");
    PruningParams p;
    double logN = std::log(double(lad.N));
    p.epsilon = 1.0 / logN;
    p.tilde_c = tilde_c < 0.0 ? 2.0 * lad.c + 2.0 : tilde_c;
    p.alpha = alpha;
    p.lambda = std::pow(logN, p.tilde_c) * gJ_inf / alpha;
    require(p.lambda > 0.0, "lambda must be positive");
    require(std::pow(1.0 + p.epsilon, double(lad.J())) <= std::exp(2.0) + 1e-9,
            "(1+eps)^J exceeds e^2; ladder too long for this epsilon");
    return p;
}

// ---------------------------------------------------------------------------
// Field-level machinery (reference path; works in both modes)
// ---------------------------------------------------------------------------

inline IntervalStyle style_for(Mode m) {
    return m == Mode::Exact ? IntervalStyle::Residue : IntervalStyle::Contiguous;
}

/// Projection of a spacetime field onto the frequency cell of one interval.
/// Exact mode: sharp comb selection of x1-bins with bin ≡ cell (mod 1/delta).
/// Real mode: raised-cosine partition of unity over the contiguous cells
/// (supported on the doubled interval, summing to one exactly).
inline ComplexField project_interval(const ComplexField& f, int64_t N, const DyadicPartition& part,
                                     int64_t cell) {
    const GridSpec& g = f.grid;
    require(g.dims() == 2, "interval projections act on spacetime fields");
    const int64_t m = part.cells;
    if (part.style == IntervalStyle::Residue) {
        return apply_multiplier(f, [m, cell](const std::vector<int64_t>& bins) {
            return bins[1] % m == cell ? 1.0 : 0.0;
        });
    }
    // contiguous: smooth bump in xi_1 = bin / (N * spacing ...) over [cell, cell+1]/m
    const double side1 = g.axes[1].side;
    return apply_multiplier(f, [&, cell](const std::vector<int64_t>& bins) {
        double xi = double(bins[1]) / side1;  // frequencies n/N occupy bins n (no wrap for f)
        if (bins[1] > g.axes[1].samples / 2) return 0.0;
        double u = xi * double(m) - double(cell);  // cell-relative coordinate in [0,1)
        // POU ramp of width 1/2 centered at each cell boundary
        auto ramp = [](double t) {
            if (t <= -0.25) return 0.0;
            if (t >= 0.25) return 1.0;
            double s = std::sin(0.25 * two_pi * (t + 0.25));
            return s * s;
        };
        return ramp(u) * (1.0 - ramp(u - 1.0));
    });
}

struct PruneResult {
    ComplexField pruned;
    double removed_mass = 0.0;  // sum over removed packets of ||f_T||^2_{L^2_avg}
    int64_t removed_packets = 0, kept_packets = 0;
    double max_kept_sup = 0.0;
};

/// Removes every wave packet of `f` at scale `delta` whose sup norm
/// exceeds lambda. Exact mode: packets are coset restrictions of the comb
/// projections and |f_I| is constant on each tube, so the sup is exact.
/// Real mode: tubes are the tilted delta^{-1} x delta^{-2} boxes and the
/// sup is taken over the tube core.
/// Coset id of a grid point for the exact-mode tube tiling of one cell
/// (class r at scale delta). Tubes are cosets of the annihilator of the
/// cap subgroup generated by (1/delta, 2r/delta) and (0, 1/delta^2); the
/// pairing image below is a canonical coset label. Unit-spacing cell only.
inline std::pair<int64_t, int64_t> exact_tube_id(int64_t N, int64_t inv_delta, int64_t cell,
                                                 int64_t x2, int64_t x1) {
    const int64_t n2 = N * N;
    int64_t t = ((x1 % N) * N % n2 + (2 * cell) % n2 * (x2 % n2) % n2) % n2;
    int64_t a = inv_delta % n2 * t % n2;
    int64_t b = inv_delta * inv_delta % n2 * (x2 % n2) % n2;
    return {a, b};
}

inline PruneResult prune(const ComplexField& f, int64_t N, double delta, double lambda,
                         int prime = 2) {
    const GridSpec& g = f.grid;
    DyadicPartition part(delta, style_for(g.mode), prime);
    const int64_t M2 = g.axes[0].samples, M1 = g.axes[1].samples;
    const double inv_delta = 1.0 / delta;
    const int64_t inv_delta_i = int64_t(std::llround(inv_delta));
    if (g.mode == Mode::Exact)
        require(M1 == int64_t(std::llround(g.axes[1].side)) && M2 == int64_t(std::llround(g.axes[0].side)),
                "exact-mode pruning runs on the unit-spacing cell");

    PruneResult out;
    out.pruned = ComplexField(g);
    const double cell_over_q = g.cell_volume() / g.volume();

    for (int64_t cell = 0; cell < part.cells; ++cell) {
        ComplexField fI = project_interval(f, N, part, cell);
        // map each grid point to a tube id, collect per-tube sups
        std::map<std::pair<int64_t, int64_t>, double> sup;
        std::vector<std::pair<int64_t, int64_t>> ids(std::size_t(M1 * M2));
        const double c_center = (double(cell) + 0.5) * delta;
        for (int64_t l = 0; l < M2; ++l) {
            for (int64_t j = 0; j < M1; ++j) {
                std::pair<int64_t, int64_t> id;
                if (g.mode == Mode::Exact) {
                    id = exact_tube_id(N, inv_delta_i, cell, l, j);
                } else {
                    double x1 = double(j) * g.axes[1].spacing();
                    double x2 = double(l) * g.axes[0].spacing();
                    double u = x1 - 2.0 * c_center * x2;
                    double period = g.axes[1].side;
                    double um = u - std::floor(u / period) * period;
                    id = {int64_t(std::floor(um / inv_delta)),
                          int64_t(std::floor(x2 / (inv_delta * inv_delta)))};
                }
                ids[std::size_t(l * M1 + j)] = id;
                double a = std::abs(fI.v[std::size_t(l * M1 + j)]);
                auto it = sup.find(id);
                if (it == sup.end())
                    sup.emplace(id, a);
                else
                    it->second = std::max(it->second, a);
            }
        }
        for (int64_t i = 0; i < fI.size(); ++i) {
            double s = sup[ids[std::size_t(i)]];
            if (s <= lambda)
                out.pruned.v[i] += fI.v[i];
            else
                out.removed_mass += std::norm(fI.v[i]) * cell_over_q;
        }
        for (auto& [id, s] : sup) {
            if (s <= lambda) {
                ++out.kept_packets;
                out.max_kept_sup = std::max(out.max_kept_sup, s);
            } else {
                ++out.removed_packets;
            }
        }
    }
    return out;
}

/// g(x) = sum over the scale-delta cells of |P_I f|^2.
inline RealField square_function(const ComplexField& f, int64_t N, double delta, int prime = 2) {
    DyadicPartition part(delta, style_for(f.grid.mode), prime);
    RealField g(f.grid);
    for (int64_t cell = 0; cell < part.cells; ++cell) {
        ComplexField fI = project_interval(f, N, part, cell);
        for (int64_t i = 0; i < g.size(); ++i) g.v[i] += std::norm(fI.v[i]);
    }
    return g;
}

/// The pruned square-function cascade, field-level. stack.g[j] is the
/// square function at scale deltas[j]; g[J] comes from the unpruned field,
/// g[j] for j < J from the pruned f_{j+1}. pruned[j] holds f_j.
struct SquareFunctionStack {
    ScaleLadder ladder;
    std::vector<RealField> g;            // indexed 0..J
    std::vector<ComplexField> pruned;    // pruned[j] = f_j for 1 <= j <= J
    std::vector<PruneResult> prune_log;  // one entry per pruning step (j = J..1)
};

inline SquareFunctionStack build_stack(const ExpSumSpec& spec, const ScaleLadder& lad,
                                       double lambda, const GridSpec& grid) {
    SquareFunctionStack st;
    st.ladder = lad;
    const int J = lad.J();
    st.g.resize(std::size_t(J) + 1);
    st.pruned.resize(std::size_t(J) + 1);
    ComplexField f = eval_exp_sum(spec, grid);
    st.g[std::size_t(J)] = square_function(f, spec.N, lad.deltas[std::size_t(J)], lad.prime);
    PruneResult pr = prune(f, spec.N, lad.deltas[std::size_t(J)], lambda, lad.prime);
    st.pruned[std::size_t(J)] = pr.pruned;
    st.prune_log.push_back(std::move(pr));
    for (int j = J - 1; j >= 0; --j) {
        st.g[std::size_t(j)] =
            square_function(st.pruned[std::size_t(j + 1)], spec.N, lad.deltas[std::size_t(j)], lad.prime);
        if (j >= 1) {
            PruneResult p2 = prune(st.pruned[std::size_t(j + 1)], spec.N, lad.deltas[std::size_t(j)],
                                   lambda, lad.prime);
            st.pruned[std::size_t(j)] = p2.pruned;
            st.prune_log.push_back(std::move(p2));
        }
    }
    return st;
}

/// Omega_j and the low set. masks omega[j] for j = 0..J-1; a point lands in
/// the highest j with g_j >= (1+eps) g_{j+1}, or in L if none.
struct OmegaDecomposition {
    std::vector<RegionMask> omega;
    RegionMask low;
};

inline OmegaDecomposition classify(const SquareFunctionStack& st, double epsilon) {
    const int J = st.ladder.J();
    require(int(st.g.size()) == J + 1, "incomplete square-function stack");
    const GridSpec& grid = st.g[0].grid;
    OmegaDecomposition dec;
    dec.omega.assign(std::size_t(J), RegionMask(grid));
    dec.low = RegionMask(grid);
    for (int64_t i = 0; i < grid.point_count(); ++i) {
        int label = -1;
        for (int j = J - 1; j >= 0; --j)
            if (st.g[std::size_t(j)].v[i] >= (1.0 + epsilon) * st.g[std::size_t(j + 1)].v[i]) {
                label = j;
                break;
            }
        if (label < 0)
            dec.low.m[i] = 1;
        else
            dec.omega[std::size_t(label)].m[i] = 1;
    }
    return dec;
}

/// U_alpha(f): points where the largest off-diagonal bilinear amplitude
/// max_{I != I'} |f_I f_I'|^{1/2} lies in [alpha, 2 alpha) and the cap
/// l^6 aggregate stays below (log N)^{c'} alpha.
inline RegionMask level_set(const ExpSumSpec& spec, const GridSpec& grid, double alpha,
                            const DyadicPartition& bilinear, double c_prime) {
    require(alpha > 0.0, "alpha must be positive");
    RegionMask mask(grid);
    if (bilinear.cells < 2) return mask;  // no off-diagonal pair exists
    std::vector<ComplexField> comp;
    comp.reserve(std::size_t(bilinear.cells));
    for (int64_t k = 0; k < bilinear.cells; ++k)
        comp.push_back(partial_sum(spec, Interval{bilinear, k}, grid));
    const double cap = std::pow(std::log(double(spec.N)), c_prime) * alpha;
    for (int64_t i = 0; i < grid.point_count(); ++i) {
        double top1 = 0.0, top2 = 0.0, p6 = 0.0;
        for (const auto& c : comp) {
            double a = std::abs(c.v[i]);
            p6 += a * a * a * a * a * a;
            if (a > top1) {
                top2 = top1;
                top1 = a;
            } else if (a > top2) {
                top2 = a;
            }
        }
        double pairamp = std::sqrt(top1 * top2);
        if (pairamp >= alpha && pairamp < 2.0 * alpha && std::pow(p6, 1.0 / 6.0) <= cap)
            mask.m[i] = 1;
    }
    return mask;
}

// ---------------------------------------------------------------------------
// Low / high lemma verification
// ---------------------------------------------------------------------------

/// Grid for lemma checks: x1 doubled so quadratic frequency differences
/// are alias-free, x2 at the canonical N^2 resolution.
inline GridSpec lemma_grid(int64_t N, Mode mode) { return q_cell_grid(N, mode, 2, 1); }

/// max_x | (|sum f_I|^2 - sum |f_I|^2) * lowpass kernel |. Exact identity
/// in exact mode (cross terms live off the comb); real mode returns the
/// measured discrepancy.
inline double verify_low_lemma(const ExpSumSpec& spec, double r, Mode mode) {
    GridSpec grid = lemma_grid(spec.N, mode);
    DyadicPartition part(r, style_for(mode));
    ComplexField f = eval_exp_sum(spec, grid);
    ComplexField f2(grid);
    for (int64_t i = 0; i < f.size(); ++i) f2.v[i] = std::norm(f.v[i]);
    ComplexField lhs = lowpass_convolve(f2, r);

    ComplexField rhs(grid);
    for (int64_t cell = 0; cell < part.cells; ++cell) {
        ComplexField fI = partial_sum(spec, Interval{part, cell}, grid);
        for (int64_t i = 0; i < rhs.size(); ++i) rhs.v[i] += std::norm(fI.v[i]);
    }
    rhs = lowpass_convolve(rhs, r);

    double worst = 0.0;
    for (int64_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, std::abs(lhs.v[i] - rhs.v[i]));
    return worst;
}

struct LemmaCheck {
    double lhs = 0.0, rhs = 0.0;
    bool holds = false;
};

namespace detail {
/// Per-bin weight of the high-pass complement at `cutoff` (sharp comb
/// complement in exact mode, raised-cosine complement in real mode).
inline std::vector<double> highpass_weights(const GridSpec& grid, double cutoff) {
    std::vector<double> w(std::size_t(grid.point_count()));
    const int64_t inv = int64_t(std::llround(1.0 / cutoff));
    auto ext = grid.extents();
    std::vector<int64_t> idx(ext.size(), 0);
    for (int64_t i = 0; i < grid.point_count(); ++i) {
        if (grid.mode == Mode::Exact) {
            bool in_comb = true;
            for (std::size_t a = 0; a < idx.size(); ++a) {
                int64_t m = std::gcd(inv, ext[a]);  // powers of p: min of the two
                if (idx[a] % std::max<int64_t>(m, 1) != 0) in_comb = false;
            }
            w[std::size_t(i)] = in_comb ? 0.0 : 1.0;
        } else {
            double r2 = 0.0;
            for (std::size_t a = 0; a < idx.size(); ++a) {
                double xi = grid.bin_frequency(int(a), idx[a]);
                r2 += xi * xi;
            }
            w[std::size_t(i)] = 1.0 - raised_cosine(std::sqrt(r2), cutoff);
        }
        for (int a = int(ext.size()) - 1; a >= 0; --a) {
            if (++idx[a] < ext[a]) break;
            idx[a] = 0;
        }
    }
    return w;
}
/// Spectrum of |f_I|^2 for one cell (unitary DFT of the pointwise square).
inline ComplexField squared_cell_spectrum(const ExpSumSpec& spec, const GridSpec& grid,
                                          const DyadicPartition& part, int64_t cell) {
    ComplexField fI = partial_sum(spec, Interval{part, cell}, grid);
    for (int64_t i = 0; i < fI.size(); ++i) fI.v[i] = std::norm(fI.v[i]);
    return dft_forward(fI);
}
}  // namespace detail

/// int |sum_I h_I|^2 <= (delta_{j-1}/delta_j) sum_I int |h_I|^2 with
/// h_I = |f_I|^2 * (high pass at delta_j), I at scale delta_{j-1}.
/// Both sides are computed spectrally (Parseval) from per-cell DFTs.
inline LemmaCheck verify_high_lemma(const ExpSumSpec& spec, double delta_coarse, double delta_fine,
                                    Mode mode) {
    require(delta_coarse > delta_fine, "needs delta_{j-1} > delta_j");
    GridSpec grid = lemma_grid(spec.N, mode);
    DyadicPartition part(delta_coarse, style_for(mode));
    auto keep = detail::highpass_weights(grid, delta_fine);

    std::vector<cplx> total(std::size_t(grid.point_count()), cplx(0, 0));
    Kahan per_cell_sq;
    for (int64_t cell = 0; cell < part.cells; ++cell) {
        ComplexField hat = detail::squared_cell_spectrum(spec, grid, part, cell);
        Kahan sq;
        for (int64_t i = 0; i < hat.size(); ++i) {
            cplx z = hat.v[i] * keep[std::size_t(i)];
            total[std::size_t(i)] += z;
            sq.add(std::norm(z));
        }
        per_cell_sq.add(sq.value());
    }
    const double fint = grid.cell_volume() / grid.volume();  // avg-integral factor
    Kahan lhs;
    for (const cplx& z : total) lhs.add(std::norm(z));
    LemmaCheck out;
    out.lhs = lhs.value() * fint;
    out.rhs = (delta_coarse / delta_fine) * per_cell_sq.value() * fint;
    out.holds = out.lhs <= out.rhs * (1.0 + 1e-9);
    return out;
}

/// Block-decoupling variant: with components at scale delta (cells I) and
/// blocks at the coarser delta_block,
///   int |sum_I h_I|^2 = sum_B int |sum_{I in B} h_I|^2,
/// h_I = |f_I|^2 * (high pass at the wave-envelope scale w_{j-1} =
/// N^{-2} delta_block^{-1}). Exact-mode equality; `holds` is equality to
/// 1e-9 relative.
inline LemmaCheck verify_high_lemma_variant(const ExpSumSpec& spec, double delta,
                                            double delta_block, Mode mode,
                                            double w_cutoff = -1.0) {
    require(delta_block >= 2.0 * delta, "blocks must be at least one level coarser");
    GridSpec grid = lemma_grid(spec.N, mode);
    DyadicPartition part(delta, style_for(mode));
    DyadicPartition blocks(delta_block, style_for(mode));
    require(blocks.cells <= 64, "variant check capped at 64 blocks");
    const double w = w_cutoff > 0.0
                         ? w_cutoff
                         : 1.0 / (double(spec.N) * double(spec.N) * delta_block);  // w_{j-1}
    auto keep = detail::highpass_weights(grid, w);

    const int64_t n_pts = grid.point_count();
    std::vector<cplx> total(std::size_t(n_pts), cplx(0, 0));
    std::vector<std::vector<cplx>> block_tot(std::size_t(blocks.cells),
                                             std::vector<cplx>(std::size_t(n_pts), cplx(0, 0)));
    for (int64_t cell = 0; cell < part.cells; ++cell) {
        ComplexField hat = detail::squared_cell_spectrum(spec, grid, part, cell);
        int64_t b = part.style == IntervalStyle::Residue ? cell % blocks.cells
                                                         : cell / (part.cells / blocks.cells);
        auto& bt = block_tot[std::size_t(b)];
        for (int64_t i = 0; i < n_pts; ++i) {
            cplx z = hat.v[i] * keep[std::size_t(i)];
            total[std::size_t(i)] += z;
            bt[std::size_t(i)] += z;
        }
    }
    const double fint = grid.cell_volume() / grid.volume();
    Kahan lhs, rhs;
    for (const cplx& z : total) lhs.add(std::norm(z));
    for (const auto& bt : block_tot) {
        Kahan s;
        for (const cplx& z : bt) s.add(std::norm(z));
        rhs.add(s.value());
    }
    LemmaCheck out;
    out.lhs = lhs.value() * fint;
    out.rhs = rhs.value() * fint;
    double scale = std::max({out.lhs, out.rhs, 1e-300});
    out.holds = std::abs(out.lhs - out.rhs) <= 1e-9 * scale;
    return out;
}

// ---------------------------------------------------------------------------
// The full high-low pipeline
// ---------------------------------------------------------------------------

struct PipelineRow {
    double alpha = 0.0;
    int region = -1;  // omega index, -1 for the low set
    int64_t points = 0;
    double measured = 0.0;  // alpha^6 |U_alpha ∩ region| / |Q|
    double bound = 0.0;     // [(log N)^{c_bound} ||a||_2]^6
    bool pass = true;
};

struct PipelineReport {
    int64_t N = 0;
    Mode mode = Mode::Exact;
    double c_ladder = 1.0, c_bound = 3.0, tilde_c = 0.0, c_prime = 0.0, epsilon = 0.0;
    std::vector<double> deltas;
    int64_t lattice_points = 0, x2_stride = 1;
    double coeff_l2 = 0.0, gJ_inf = 0.0, f_inf_lattice = 0.0, alpha_max = 0.0;
    double low_chain_bound = 0.0;      // (1+eps)^{J/2} (fint g_J^3)^{1/6}
    double max_chain_violation = 0.0;  // max over L of g_0 - (1+eps)^J g_J
    bool pruning_active = false;
    std::vector<PipelineRow> rows;
    bool all_pass = true;

    std::string region_name(int r) const {
        return r < 0 ? std::string("low") : "omega_" + std::to_string(r);
    }
};

struct HighLowOptions {
    double c_ladder = 1.0;
    double c_bound = 3.0;
    double tilde_c = -1.0;  // default 2c+2
    double c_prime = -1.0;  // default c_ladder+1
    int64_t x2_stride = 0;  // 0 = auto (capped lattice)
    Mode mode = Mode::Exact;
};

namespace detail {

/// Point-local cascade state on the unit cell. Residue classes at level
/// l aggregate by n mod p^l, so each coarsening is a strided sum.
struct CascadeScratch {
    std::vector<cplx> chars, cur, next;
    std::vector<cplx> raw1;  // unpruned components at the bilinear scale
};

/// Runs the pruned cascade at one point. `keep_finest[n]` encodes the
/// scale-delta_J pruning (|a_n| <= lambda). Returns g_j values for
/// j = 0..J (g[J] from the unpruned field), plus unpruned delta_1
/// components and the raw field value. Exact mode: packet sups equal the
/// pointwise component modulus (constant on tube cosets), so pruning at
/// every level is a pointwise comparison against lambda.
inline void cascade_point(const ScaleLadder& lad, const std::vector<cplx>& coeffs, double lambda,
                          bool pruning, CascadeScratch& s, std::vector<double>& g_out,
                          cplx& f_raw, double& gJ_const) {
    const int64_t N = lad.N;
    const int J = lad.J();
    g_out.assign(std::size_t(J) + 1, 0.0);
    g_out[std::size_t(J)] = gJ_const;  // g_J = sum |a_n|^2, constant on Q

    // unpruned bilinear components and the raw field value
    int64_t m1 = int64_t(std::llround(1.0 / lad.deltas[std::size_t(std::min(1, J))]));
    s.raw1.assign(std::size_t(m1), cplx(0, 0));
    KahanC ftot;
    for (int64_t n = 0; n < N; ++n) {
        s.raw1[std::size_t(n % m1)] += s.chars[std::size_t(n)];
        ftot.add(s.chars[std::size_t(n)]);
    }
    f_raw = ftot.value();

    // pruned chain: components of f_{j+1} at scale delta_j, then prune
    s.cur.assign(std::size_t(N), cplx(0, 0));
    for (int64_t n = 0; n < N; ++n) {
        cplx z = s.chars[std::size_t(n)];
        if (pruning && std::abs(coeffs[std::size_t(n)]) > lambda) z = 0.0;  // delta_J prune
        s.cur[std::size_t(n)] = z;
    }
    int64_t cur_m = N;
    for (int j = J - 1; j >= 0; --j) {
        int64_t mj = int64_t(std::llround(1.0 / lad.deltas[std::size_t(j)]));
        s.next.assign(std::size_t(mj), cplx(0, 0));
        for (int64_t c = 0; c < cur_m; ++c) s.next[std::size_t(c % mj)] += s.cur[std::size_t(c)];
        double gj = 0.0;
        for (int64_t b = 0; b < mj; ++b) gj += std::norm(s.next[std::size_t(b)]);
        g_out[std::size_t(j)] = gj;
        if (j >= 1 && pruning)
            for (int64_t b = 0; b < mj; ++b)
                if (std::abs(s.next[std::size_t(b)]) > lambda) s.next[std::size_t(b)] = 0.0;
        std::swap(s.cur, s.next);
        cur_m = mj;
    }
}

}  // namespace detail

/// Exact-mode pipeline on the unit cell lattice [0,N) x [0,N^2) with an
/// optional documented x2 stride. Emits, per dyadic alpha and region, the
/// measured alpha^6 |U_alpha ∩ region| / |Q| against the fixed bound.
inline PipelineReport run_highlow_pipeline(const ExpSumSpec& spec, const HighLowOptions& opt) {
    require(opt.mode == Mode::Exact, "the cascade pipeline is exact-mode; use the field engine in real mode");
    const int64_t N = spec.N;
    require(N <= 1024, "pipeline lattice capped at N = 1024");
    ScaleLadder lad = build_ladder(N, opt.c_ladder);
    const int J = lad.J();
    const double logN = std::log(double(N));

    PipelineReport rep;
    rep.N = N;
    rep.mode = opt.mode;
    rep.c_ladder = opt.c_ladder;
    rep.c_bound = opt.c_bound;
    rep.tilde_c = opt.tilde_c < 0.0 ? 2.0 * opt.c_ladder + 2.0 : opt.tilde_c;
    rep.c_prime = opt.c_prime < 0.0 ? opt.c_ladder + 1.0 : opt.c_prime;
    rep.epsilon = 1.0 / logN;
    rep.deltas = lad.deltas;
    rep.coeff_l2 = spec.coeff_l2();

    double gJ_const = 0.0, l1 = 0.0;
    for (const cplx& z : spec.coeffs) {
        gJ_const += std::norm(z);
        l1 += std::abs(z);
    }
    rep.gJ_inf = gJ_const;
    rep.low_chain_bound = std::pow(1.0 + rep.epsilon, 0.5 * J) * std::sqrt(gJ_const);

    // dyadic alpha sweep [~||f||inf / N, ~||f||inf]
    const double alpha_max = round_down_pow(2, std::max(l1, 1e-12));
    rep.alpha_max = alpha_max;
    const int n_bands = log2_exact(N) + 2;

    // pruning never engages when lambda at the largest alpha dominates the
    // largest possible packet sup (bounded by the class l^1 mass)
    double sup_bound = 0.0;
    for (int j = 1; j <= J; ++j) {
        int64_t mj = int64_t(std::llround(1.0 / lad.deltas[std::size_t(j)]));
        std::vector<double> cls(std::size_t(mj), 0.0);
        for (int64_t n = 0; n < N; ++n) cls[std::size_t(n % mj)] += std::abs(spec.coeffs[std::size_t(n)]);
        for (double c : cls) sup_bound = std::max(sup_bound, c);
    }
    const double lambda_min = std::pow(logN, rep.tilde_c) * gJ_const / alpha_max;
    rep.pruning_active = lambda_min < sup_bound;

    int64_t stride = opt.x2_stride;
    if (stride <= 0) stride = std::max<int64_t>(1, (N * N * N) >> 22);
    while ((N * N) % stride != 0) stride >>= 1;
    rep.x2_stride = stride;
    const int64_t slices = N * N / stride;
    rep.lattice_points = slices * N;

    const double bound = std::pow(std::pow(logN, opt.c_bound) * rep.coeff_l2, 6.0);
    const int n_regions = J + 1;  // omega_{J-1..0} then low
    std::vector<std::vector<int64_t>> counts(
        std::size_t(n_bands), std::vector<int64_t>(std::size_t(n_regions), 0));

    auto e1 = detail::root_table(N);
    auto e2 = detail::root_table(N * N);
    detail::CascadeScratch scratch;
    std::vector<double> g_vals;
    scratch.chars.resize(std::size_t(N));

    const int n_alpha_passes = rep.pruning_active ? n_bands : 1;
    require(!rep.pruning_active || N <= 64, "per-alpha pruned cascade capped at N = 64");

    std::vector<cplx> e2n(static_cast<std::size_t>(N));
    for (int pass = 0; pass < n_alpha_passes; ++pass) {
        double alpha_pass = alpha_max * std::pow(2.0, -double(pass));
        double lambda = std::pow(logN, rep.tilde_c) * gJ_const / alpha_pass;
        for (int64_t sl = 0; sl < slices; ++sl) {
            int64_t l = sl * stride;
            // per-slice x2 phases
            for (int64_t n = 0; n < N; ++n)
                e2n[std::size_t(n)] = e2[std::size_t((n * n % (N * N)) * (l % (N * N)) % (N * N))];
            for (int64_t j = 0; j < N; ++j) {
                for (int64_t n = 0; n < N; ++n)
                    scratch.chars[std::size_t(n)] =
                        spec.coeffs[std::size_t(n)] * e1[std::size_t(n * j % N)] * e2n[std::size_t(n)];
                cplx f_raw;
                detail::cascade_point(lad, spec.coeffs, lambda, rep.pruning_active, scratch, g_vals,
                                      f_raw, gJ_const);
                rep.f_inf_lattice = std::max(rep.f_inf_lattice, std::abs(f_raw));

                int label = -1;
                for (int lev = J - 1; lev >= 0; --lev)
                    if (g_vals[std::size_t(lev)] >= (1.0 + rep.epsilon) * g_vals[std::size_t(lev + 1)]) {
                        label = lev;
                        break;
                    }
                if (label < 0) {
                    double viol = g_vals[0] - std::pow(1.0 + rep.epsilon, double(J)) * g_vals[std::size_t(J)];
                    rep.max_chain_violation = std::max(rep.max_chain_violation, viol);
                }
                int region_idx = label < 0 ? n_regions - 1 : (J - 1 - label);

                // U_alpha membership from the unpruned bilinear components
                double top1 = 0.0, top2 = 0.0, p6 = 0.0;
                for (const cplx& z : scratch.raw1) {
                    double a = std::abs(z);
                    p6 += a * a * a * a * a * a;
                    if (a > top1) {
                        top2 = top1;
                        top1 = a;
                    } else if (a > top2) {
                        top2 = a;
                    }
                }
                double pairamp = std::sqrt(top1 * top2);
                if (pairamp > 0.0 && scratch.raw1.size() >= 2) {
                    double r = pairamp / alpha_max;
                    int band = int(std::ceil(-std::log2(r) - 1e-12));
                    if (band >= 0 && band < n_bands) {
                        double alpha = alpha_max * std::pow(2.0, -double(band));
                        bool cap_ok = std::pow(p6, 1.0 / 6.0) <= std::pow(logN, rep.c_prime) * alpha;
                        bool band_in_pass = !rep.pruning_active || band == pass;
                        if (cap_ok && band_in_pass)
                            ++counts[std::size_t(band)][std::size_t(region_idx)];
                    }
                }
            }
        }
        if (!rep.pruning_active) break;
    }

    rep.rows.reserve(std::size_t(n_bands) * std::size_t(n_regions));
    for (int b = 0; b < n_bands; ++b) {
        double alpha = alpha_max * std::pow(2.0, -double(b));
        for (int rgn = 0; rgn < n_regions; ++rgn) {
            PipelineRow row;
            row.alpha = alpha;
            row.region = rgn == n_regions - 1 ? -1 : J - 1 - rgn;
            row.points = counts[std::size_t(b)][std::size_t(rgn)];
            row.measured = std::pow(alpha, 6.0) * double(row.points) / double(rep.lattice_points);
            row.bound = bound;
            row.pass = row.measured <= bound;
            rep.all_pass = rep.all_pass && row.pass;
            rep.rows.push_back(row);
        }
    }
    if (rep.max_chain_violation > 1e-9 * gJ_const) rep.all_pass = false;
    return rep;
}

/// Field-level pipeline (reference path; required for real mode, feasible
/// for small N in both modes). Same row semantics as the cascade engine.
inline PipelineReport run_highlow_pipeline_fields(const ExpSumSpec& spec, const HighLowOptions& opt) {
    const int64_t N = spec.N;
    require(N <= 64, "field-level pipeline capped at N = 64");
    ScaleLadder lad = build_ladder(N, opt.c_ladder);
    const int J = lad.J();
    const double logN = std::log(double(N));
    GridSpec grid = opt.mode == Mode::Exact ? q_cell_grid(N, Mode::Exact, 1, 1)
                                            : q_cell_grid(N, Mode::Real, 2, 2);

    PipelineReport rep;
    rep.N = N;
    rep.mode = opt.mode;
    rep.c_ladder = opt.c_ladder;
    rep.c_bound = opt.c_bound;
    rep.tilde_c = opt.tilde_c < 0.0 ? 2.0 * opt.c_ladder + 2.0 : opt.tilde_c;
    rep.c_prime = opt.c_prime < 0.0 ? opt.c_ladder + 1.0 : opt.c_prime;
    rep.epsilon = 1.0 / logN;
    rep.deltas = lad.deltas;
    rep.coeff_l2 = spec.coeff_l2();
    rep.x2_stride = 1;
    rep.lattice_points = grid.point_count();

    ComplexField f = eval_exp_sum(spec, grid);
    rep.f_inf_lattice = linf_norm(f);
    RealField gJ = square_function(f, N, lad.deltas[std::size_t(J)], lad.prime);
    rep.gJ_inf = *std::max_element(gJ.v.begin(), gJ.v.end());
    {
        Kahan g3;
        for (double v : gJ.v) g3.add(v * v * v);
        rep.low_chain_bound = std::pow(1.0 + rep.epsilon, 0.5 * J) *
                              std::pow(g3.value() * grid.cell_volume() / grid.volume(), 1.0 / 6.0);
    }

    double l1 = 0.0;
    for (const cplx& z : spec.coeffs) l1 += std::abs(z);
    const double alpha_max = round_down_pow(2, std::max(l1, 1e-12));
    rep.alpha_max = alpha_max;
    const int n_bands = log2_exact(N) + 2;
    const double bound = std::pow(std::pow(logN, opt.c_bound) * rep.coeff_l2, 6.0);
    const int n_regions = J + 1;

    DyadicPartition bilinear(lad.deltas[std::size_t(std::min(1, J))], style_for(opt.mode));
    for (int b = 0; b < n_bands; ++b) {
        double alpha = alpha_max * std::pow(2.0, -double(b));
        double lambda = std::pow(logN, rep.tilde_c) * rep.gJ_inf / alpha;
        SquareFunctionStack st = build_stack(spec, lad, lambda, grid);
        OmegaDecomposition dec = classify(st, rep.epsilon);
        RegionMask u = level_set(spec, grid, alpha, bilinear, rep.c_prime);
        for (int64_t i = 0; i < grid.point_count(); ++i)
            if (dec.low.m[i]) {
                double viol = st.g[0].v[i] -
                              std::pow(1.0 + rep.epsilon, double(J)) * st.g[std::size_t(J)].v[i];
                rep.max_chain_violation = std::max(rep.max_chain_violation, viol);
            }
        for (int rgn = 0; rgn < n_regions; ++rgn) {
            const RegionMask& mask = rgn == n_regions - 1 ? dec.low : dec.omega[std::size_t(J - 1 - rgn)];
            int64_t cnt = 0;
            for (int64_t i = 0; i < grid.point_count(); ++i) cnt += (u.m[i] && mask.m[i]);
            PipelineRow row;
            row.alpha = alpha;
            row.region = rgn == n_regions - 1 ? -1 : J - 1 - rgn;
            row.points = cnt;
            row.measured = std::pow(alpha, 6.0) * double(cnt) / double(rep.lattice_points);
            row.bound = bound;
            row.pass = row.measured <= bound;
            rep.all_pass = rep.all_pass && row.pass;
            rep.rows.push_back(row);
        }
    }
    if (rep.max_chain_violation > 1e-6 * std::max(rep.gJ_inf, 1.0)) rep.all_pass = false;
    return rep;
}

}  // namespace eslab
