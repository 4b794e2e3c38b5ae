#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mvridge/transform.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

/// A scale-local maximum of the transform-vector norm at one time sample,
/// interpolated between grid levels.
struct RidgePoint {
    Eigen::Index t = 0;
    double scale = 0.0;
    double frequency = 0.0;    // peak_frequency / scale, radian
    Eigen::VectorXcd value;    // interpolated transform vector, per channel
    double magnitude = 0.0;    // ||value||
    bool edge = false;         // inside two wavelet half-widths of a record end
};

/// Time-connected chain of ridge points, single-valued in time, plus the
/// along-ridge estimates once annotated.
struct RidgeCurve {
    std::vector<RidgePoint> points;  // contiguous t range, one point per sample
    ComplexMatrix signal;            // channels x length, x_hat_plus
    Eigen::VectorXd frequency;       // omega_hat along the ridge
    Eigen::VectorXd curvature;       // xi_hat along the ridge
    ComplexMatrix bias;              // channels x length
    double cycles = 0.0;             // integrated frequency / 2pi over non-edge samples

    Eigen::Index length() const { return static_cast<Eigen::Index>(points.size()); }
    Eigen::Index t_begin() const { return points.empty() ? 0 : points.front().t; }
    Eigen::Index t_end() const { return points.empty() ? 0 : points.back().t + 1; }
    bool annotated() const { return signal.cols() == length() && length() > 0; }
};

namespace detail {

/// Linear interpolation of per-channel (scales x time) planes in log-scale.
inline Eigen::VectorXcd interp_planes(const std::vector<ComplexMatrix>& planes, const ScaleGrid& grid,
                                      double scale, Eigen::Index t) {
    const Eigen::Index s_count = grid.levels();
    const double pos = (std::log(scale) - std::log(grid.scales[0])) / grid.log_spacing();
    Eigen::Index j = static_cast<Eigen::Index>(std::floor(pos));
    j = std::clamp<Eigen::Index>(j, 0, s_count - 2);
    const double frac = std::clamp(pos - static_cast<double>(j), 0.0, 1.0);
    Eigen::VectorXcd out(static_cast<Eigen::Index>(planes.size()));
    for (std::size_t c = 0; c < planes.size(); ++c)
        out[static_cast<Eigen::Index>(c)] = (1.0 - frac) * planes[c](j, t) + frac * planes[c](j + 1, t);
    return out;
}

inline double cycles_over(const std::vector<RidgePoint>& pts, const Eigen::VectorXd* freq, double dt) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].edge) continue;  // bias theory assumes full wavelet support
        const double f = freq ? (*freq)[static_cast<Eigen::Index>(i)] : pts[i].frequency;
        if (std::isfinite(f)) sum += f * dt;
    }
    return sum / kTwoPi;
}

}  // namespace detail

/// All scale-local maxima of ||w(t, .)|| above the floor, one list per time
/// sample.  The fractional scale comes from the vertex of the parabola fit to
/// log||w|| at the three bracketing levels (uniform in log-scale); transform
/// values are interpolated linearly in log-scale per channel.
inline std::vector<std::vector<RidgePoint>> detect_ridge_points(const TransformCube& cube,
                                                                double magnitude_floor) {
    const Eigen::Index s_count = cube.levels();
    if (s_count < 3) throw std::invalid_argument("detect_ridge_points: need at least 3 scale levels");
    const Eigen::Index t_count = cube.samples();
    const RealMatrix norm2 = cube.norm_squared();
    const double floor2 = magnitude_floor * magnitude_floor;

    std::vector<std::vector<RidgePoint>> out(static_cast<std::size_t>(t_count));
    for (Eigen::Index t = 0; t < t_count; ++t) {
        for (Eigen::Index j = 1; j + 1 < s_count; ++j) {
            const double m2 = norm2(j, t);
            if (!(m2 > floor2) || !(m2 > norm2(j - 1, t)) || !(m2 > norm2(j + 1, t))) continue;
            const double y0 = 0.5 * std::log(norm2(j - 1, t));
            const double y1 = 0.5 * std::log(m2);
            const double y2 = 0.5 * std::log(norm2(j + 1, t));
            double offset = 0.0;
            const double denom = y0 - 2.0 * y1 + y2;
            if (denom < 0.0) offset = std::clamp(0.5 * (y0 - y2) / denom, -1.0, 1.0);

            RidgePoint p;
            p.t = t;
            p.scale = std::exp(std::log(cube.grid.scales[j]) + offset * cube.grid.log_spacing());
            p.frequency = cube.grid.peak_frequency / p.scale;
            p.value = detail::interp_planes(cube.w, cube.grid, p.scale, t);
            p.magnitude = p.value.norm();
            p.edge = t < cube.edge_width[j] || t >= t_count - cube.edge_width[j];
            out[static_cast<std::size_t>(t)].push_back(std::move(p));
        }
    }
    return out;
}

/// Chain ridge points across time by greedy nearest-in-log-scale matching,
/// bounded by max_dlogscale per sample step; ties break toward the smaller
/// jump, then the larger magnitude.  Curves executing fewer than min_cycles
/// complete cycles (edge samples excluded) are discarded.
inline std::vector<RidgeCurve> chain_ridges(const std::vector<std::vector<RidgePoint>>& points,
                                            double max_dlogscale, double min_cycles, double dt) {
    std::vector<RidgeCurve> done;
    std::vector<RidgeCurve> active;

    auto finalize = [&](RidgeCurve&& c) {
        c.cycles = detail::cycles_over(c.points, nullptr, dt);
        if (c.cycles >= min_cycles && !c.points.empty()) done.push_back(std::move(c));
    };

    for (std::size_t t = 0; t < points.size(); ++t) {
        const auto& here = points[t];
        struct Link {
            double jump;
            double magnitude;
            std::size_t curve, point;
        };
        std::vector<Link> links;
        for (std::size_t ci = 0; ci < active.size(); ++ci) {
            const double prev = std::log(active[ci].points.back().scale);
            for (std::size_t pi = 0; pi < here.size(); ++pi) {
                const double jump = std::abs(std::log(here[pi].scale) - prev);
                if (jump <= max_dlogscale) links.push_back({jump, here[pi].magnitude, ci, pi});
            }
        }
        std::stable_sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
            if (a.jump != b.jump) return a.jump < b.jump;
            return a.magnitude > b.magnitude;
        });
        std::vector<bool> curve_used(active.size(), false), point_used(here.size(), false);
        for (const Link& l : links) {
            if (curve_used[l.curve] || point_used[l.point]) continue;
            curve_used[l.curve] = point_used[l.point] = true;
            active[l.curve].points.push_back(here[l.point]);
        }
        // retire curves that found no continuation, then open new ones
        std::vector<RidgeCurve> still;
        for (std::size_t ci = 0; ci < active.size(); ++ci) {
            if (curve_used[ci]) still.push_back(std::move(active[ci]));
            else finalize(std::move(active[ci]));
        }
        active = std::move(still);
        for (std::size_t pi = 0; pi < here.size(); ++pi) {
            if (point_used[pi]) continue;
            RidgeCurve c;
            c.points.push_back(here[pi]);
            active.push_back(std::move(c));
        }
    }
    for (auto& c : active) finalize(std::move(c));
    return done;
}

/// Transform values along the ridge: x_hat_plus(t) = w(t, s_hat(t)).
inline ComplexMatrix estimate_signal(const RidgeCurve& curve, const TransformCube& cube) {
    ComplexMatrix out(cube.channels(), curve.length());
    for (Eigen::Index i = 0; i < curve.length(); ++i)
        out.col(i) = detail::interp_planes(cube.w, cube.grid, curve.points[i].scale, curve.points[i].t);
    return out;
}

/// Transform frequency along the ridge, formed from the interpolated transform
/// and its time derivative.  Accurate to second order in the stability level.
inline Eigen::VectorXd estimate_frequency(const RidgeCurve& curve, const TransformCube& cube) {
    if (!cube.has_wt()) throw missing_derivative("estimate_frequency: cube lacks the d/dt plane");
    Eigen::VectorXd out(curve.length());
    for (Eigen::Index i = 0; i < curve.length(); ++i) {
        const auto& p = curve.points[i];
        const Eigen::VectorXcd v = detail::interp_planes(cube.w, cube.grid, p.scale, p.t);
        const Eigen::VectorXcd vt = detail::interp_planes(cube.wt, cube.grid, p.scale, p.t);
        const double den = v.squaredNorm();
        out[i] = (den > 0.0) ? v.dot(vt).imag() / den : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

/// Estimated bias of the signal estimate: (P^2/2) w2(t, s_hat) / omega_hat^2,
/// where w2 is the transform second-deviation vector.  Also yields the
/// curvature estimate xi_hat = ||w2|| / ||w||.
struct BiasEstimate {
    ComplexMatrix bias;         // channels x length
    Eigen::VectorXd curvature;  // xi_hat
};

inline BiasEstimate estimate_bias(const RidgeCurve& curve, const TransformCube& cube) {
    if (!cube.has_wt() || !cube.has_wtt())
        throw missing_derivative("estimate_bias: cube lacks derivative planes");
    const double half_p2 = 0.5 * cube.wavelet.duration() * cube.wavelet.duration();
    BiasEstimate est;
    est.bias.resize(cube.channels(), curve.length());
    est.curvature.resize(curve.length());
    for (Eigen::Index i = 0; i < curve.length(); ++i) {
        const auto& p = curve.points[i];
        const Eigen::VectorXcd v = detail::interp_planes(cube.w, cube.grid, p.scale, p.t);
        const Eigen::VectorXcd vt = detail::interp_planes(cube.wt, cube.grid, p.scale, p.t);
        const Eigen::VectorXcd vtt = detail::interp_planes(cube.wtt, cube.grid, p.scale, p.t);
        const double den = v.squaredNorm();
        if (!(den > 0.0)) {
            est.bias.col(i).setZero();
            est.curvature[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double om = v.dot(vt).imag() / den;
        const Eigen::VectorXcd w2 = vtt - Complex{0.0, 2.0 * om} * vt - om * om * v;
        est.bias.col(i) = half_p2 / (om * om) * w2;
        est.curvature[i] = w2.norm() / std::sqrt(den);
    }
    return est;
}

/// Fill a curve's along-ridge estimates from the cube (whatever the cube's
/// derivative planes allow) and refresh the cycle count from omega_hat.
inline void annotate_curve(RidgeCurve& curve, const TransformCube& cube) {
    curve.signal = estimate_signal(curve, cube);
    if (cube.has_wt()) {
        curve.frequency = estimate_frequency(curve, cube);
        curve.cycles = detail::cycles_over(curve.points, &curve.frequency, cube.dt);
    }
    if (cube.has_wt() && cube.has_wtt()) {
        BiasEstimate est = estimate_bias(curve, cube);
        curve.bias = std::move(est.bias);
        curve.curvature = std::move(est.curvature);
    }
}

/// Combine curves that overlap in time into single curves via a per-sample
/// power-weighted average (weights ||x_hat_plus||^2); non-overlapping stretches
/// pass through.  Output curves never overlap, so there is at most one
/// estimate per sample.  Curves must be annotated.
inline std::vector<RidgeCurve> merge_overlaps(std::vector<RidgeCurve> curves, double dt) {
    if (curves.empty()) return curves;
    for (const auto& c : curves)
        if (!c.annotated()) throw std::invalid_argument("merge_overlaps: curves must be annotated");

    std::sort(curves.begin(), curves.end(),
              [](const RidgeCurve& a, const RidgeCurve& b) { return a.t_begin() < b.t_begin(); });

    // group into connected components of the time-overlap graph
    std::vector<std::vector<std::size_t>> groups;
    Eigen::Index group_end = std::numeric_limits<Eigen::Index>::min();
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (groups.empty() || curves[i].t_begin() >= group_end) groups.emplace_back();
        groups.back().push_back(i);
        group_end = std::max(group_end, curves[i].t_end());
    }

    const Eigen::Index channels = curves.front().signal.rows();
    const bool has_freq = curves.front().frequency.size() > 0;
    const bool has_bias = curves.front().bias.cols() > 0;

    std::vector<RidgeCurve> out;
    for (const auto& group : groups) {
        if (group.size() == 1) {
            out.push_back(std::move(curves[group[0]]));
            continue;
        }
        Eigen::Index t0 = std::numeric_limits<Eigen::Index>::max(), t1 = 0;
        for (std::size_t gi : group) {
            t0 = std::min(t0, curves[gi].t_begin());
            t1 = std::max(t1, curves[gi].t_end());
        }
        const double omega_psi =
            curves[group[0]].points.front().frequency * curves[group[0]].points.front().scale;
        const Eigen::Index len = t1 - t0;
        RidgeCurve merged;
        merged.signal = ComplexMatrix::Zero(channels, len);
        if (has_freq) merged.frequency = Eigen::VectorXd::Zero(len);
        if (has_bias) {
            merged.bias = ComplexMatrix::Zero(channels, len);
            merged.curvature = Eigen::VectorXd::Zero(len);
        }
        Eigen::VectorXd weight_sum = Eigen::VectorXd::Zero(len);
        Eigen::VectorXd scale_sum = Eigen::VectorXd::Zero(len);
        std::vector<bool> covered(static_cast<std::size_t>(len), false);
        std::vector<bool> edge(static_cast<std::size_t>(len), false);

        for (std::size_t gi : group) {
            const RidgeCurve& c = curves[gi];
            for (Eigen::Index i = 0; i < c.length(); ++i) {
                const Eigen::Index k = c.points[i].t - t0;
                const double wgt = c.signal.col(i).squaredNorm();
                if (!(wgt > 0.0)) continue;
                weight_sum[k] += wgt;
                scale_sum[k] += wgt * c.points[i].scale;
                merged.signal.col(k) += wgt * c.signal.col(i);
                if (has_freq) merged.frequency[k] += wgt * c.frequency[i];
                if (has_bias) {
                    merged.bias.col(k) += wgt * c.bias.col(i);
                    merged.curvature[k] += wgt * c.curvature[i];
                }
                covered[static_cast<std::size_t>(k)] = true;
                edge[static_cast<std::size_t>(k)] = edge[static_cast<std::size_t>(k)] || c.points[i].edge;
            }
        }
        // overlap groups can still leave interior gaps (curves chained apart);
        // emit one contiguous output curve per covered run
        Eigen::Index run_start = -1;
        auto flush_run = [&](Eigen::Index begin, Eigen::Index end) {
            RidgeCurve piece;
            const Eigen::Index plen = end - begin;
            piece.signal.resize(channels, plen);
            if (has_freq) piece.frequency.resize(plen);
            if (has_bias) {
                piece.bias.resize(channels, plen);
                piece.curvature.resize(plen);
            }
            for (Eigen::Index k = begin; k < end; ++k) {
                const double wgt = weight_sum[k];
                RidgePoint p;
                p.t = t0 + k;
                p.scale = scale_sum[k] / wgt;
                p.frequency = omega_psi / p.scale;
                p.value = merged.signal.col(k) / wgt;
                p.magnitude = p.value.norm();
                p.edge = edge[static_cast<std::size_t>(k)];
                piece.signal.col(k - begin) = p.value;
                if (has_freq) piece.frequency[k - begin] = merged.frequency[k] / wgt;
                if (has_bias) {
                    piece.bias.col(k - begin) = merged.bias.col(k) / wgt;
                    piece.curvature[k - begin] = merged.curvature[k] / wgt;
                }
                piece.points.push_back(std::move(p));
            }
            piece.cycles = detail::cycles_over(piece.points, has_freq ? &piece.frequency : nullptr, dt);
            out.push_back(std::move(piece));
        };
        for (Eigen::Index k = 0; k < len; ++k) {
            if (covered[static_cast<std::size_t>(k)] && run_start < 0) run_start = k;
            if (!covered[static_cast<std::size_t>(k)] && run_start >= 0) {
                flush_run(run_start, k);
                run_start = -1;
            }
        }
        if (run_start >= 0) flush_run(run_start, len);
    }
    std::sort(out.begin(), out.end(),
              [](const RidgeCurve& a, const RidgeCurve& b) { return a.t_begin() < b.t_begin(); });
    return out;
}

/// Observed series minus the real part of the (merged) estimates where they
/// exist; channel means pass through untouched.
inline MultivariateSeries residual(const MultivariateSeries& x, const std::vector<RidgeCurve>& curves) {
    MultivariateSeries out = x;
    for (const auto& c : curves) {
        for (Eigen::Index i = 0; i < c.length(); ++i) {
            const Eigen::Index t = c.points[i].t;
            if (t < 0 || t >= out.samples()) continue;
            if (c.annotated()) {
                for (Eigen::Index ch = 0; ch < out.channels(); ++ch)
                    out.data(ch, t) -= c.signal(ch, i).real();
            } else {
                for (Eigen::Index ch = 0; ch < out.channels(); ++ch)
                    out.data(ch, t) -= c.points[i].value[ch].real();
            }
        }
    }
    return out;
}

/// Validation helper: sup over non-edge samples of |s_hat * omega_true / omega_psi - 1|,
/// normalized by delta^2 (the predicted order of the ridge's scale deviation).
/// NaN entries in truth_frequency are skipped.
inline double ridge_scale_diagnostic(const RidgeCurve& curve, const Eigen::VectorXd& truth_frequency,
                                     double peak_frequency, double delta) {
    if (truth_frequency.size() != curve.length())
        throw invalid_input("ridge_scale_diagnostic: truth length mismatch");
    double sup = 0.0;
    for (Eigen::Index i = 0; i < curve.length(); ++i) {
        if (curve.points[i].edge || !std::isfinite(truth_frequency[i])) continue;
        sup = std::max(sup, std::abs(curve.points[i].scale * truth_frequency[i] / peak_frequency - 1.0));
    }
    return sup / (delta * delta);
}

}  // namespace mvridge
