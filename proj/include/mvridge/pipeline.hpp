#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvridge/analytic.hpp"
#include "mvridge/ellipse.hpp"
#include "mvridge/grid.hpp"
#include "mvridge/morse.hpp"
#include "mvridge/ridge.hpp"
#include "mvridge/transform.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

/// End-to-end configuration.  Frequencies are cyclic (cycles per unit time) at
/// this boundary and converted to radian internally.
struct PipelineConfig {
    double beta = 3.0;
    double gamma = 3.0;
    Eigen::Index levels = 82;
    double f_min_cyc = 0.01;
    double f_max_cyc = 0.28;
    double min_cycles = -1.0;          // < 0 means the default 2 * P
    double max_level_jump = 2.0;       // chaining bound, in grid levels per sample
    double magnitude_floor_rel = 1e-3; // ridge floor relative to max ||w||
    bool mirror_padding = false;

    MorseWavelet wavelet() const { return MorseWavelet(beta, gamma); }
    double resolved_min_cycles() const {
        return (min_cycles < 0.0) ? 2.0 * MorseWavelet(beta, gamma).duration() : min_cycles;
    }
};

struct RidgeSummary {
    int id = 0;
    Eigen::Index t_begin = 0, t_end = 0;
    double cycles = 0.0;
    double mean_magnitude = 0.0;
    double delta_proxy = 0.0;  // max of the bandwidth and curvature proxies along the ridge
};

struct PipelineResult {
    std::vector<RidgeCurve> ridges;  // merged, non-overlapping
    MultivariateSeries residual;
    std::vector<EllipseSnapshot> ellipses;  // bivariate input only
    nlohmann::json diagnostics;
};

namespace detail {

inline void validate_config(const PipelineConfig& cfg, double dt) {
    if (cfg.levels < 3) throw std::invalid_argument("pipeline: need at least 3 levels");
    if (!(cfg.f_min_cyc > 0.0) || !(cfg.f_min_cyc < cfg.f_max_cyc))
        throw std::invalid_argument("pipeline: need 0 < f_min < f_max");
    if (!(cfg.f_max_cyc < 0.5 / dt))
        throw numeric_error("pipeline: f_max reaches the Nyquist frequency");
    if (!(cfg.resolved_min_cycles() > 0.0))
        throw std::invalid_argument("pipeline: min_cycles must be positive");
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Bandwidth/curvature stability proxy along an annotated ridge, skipping
/// edge-flagged samples.  The first transform deviation wt - i*Omega*w stands
/// in for the intrinsic bandwidth.
inline double ridge_delta_proxy(const RidgeCurve& curve, const TransformCube& cube) {
    if (!cube.has_wt() || curve.frequency.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    double proxy = 0.0;
    for (Eigen::Index i = 0; i < curve.length(); ++i) {
        const RidgePoint& p = curve.points[i];
        if (p.edge) continue;
        const double om = std::abs(curve.frequency[i]);
        if (!(om > 0.0) || !(p.magnitude > 0.0)) continue;
        const Eigen::VectorXcd v = interp_planes(cube.w, cube.grid, p.scale, p.t);
        const Eigen::VectorXcd vt = interp_planes(cube.wt, cube.grid, p.scale, p.t);
        const double upsilon = (vt - Complex{0.0, curve.frequency[i]} * v).norm() / p.magnitude;
        proxy = std::max(proxy, upsilon / om);
        if (curve.curvature.size())
            proxy = std::max(proxy, std::sqrt(curve.curvature[i] / (om * om)));
    }
    return proxy;
}

}  // namespace detail

/// Full analysis: analytic transform, ridge detection and chaining, along-ridge
/// estimates, power-weighted overlap merge, residual, and (for bivariate input)
/// ellipse snapshots spaced by the estimated instantaneous period.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const MultivariateSeries& x) {
    const auto t_start = std::chrono::steady_clock::now();
    if (x.channels() < 1 || x.samples() < 4) throw invalid_input("pipeline: empty input");
    detail::validate_config(cfg, x.dt);

    const MorseWavelet wav = cfg.wavelet();
    const ScaleGrid grid = ScaleGrid::logspace(cfg.levels, detail::kTwoPi * cfg.f_min_cyc,
                                               detail::kTwoPi * cfg.f_max_cyc, wav.peak_frequency());

    // optional mirror padding by one wavelet half-width at the lowest frequency
    Eigen::Index pad = 0;
    MultivariateSeries input = x;
    if (cfg.mirror_padding) {
        const double half_width = wav.duration() / (detail::kTwoPi * cfg.f_min_cyc);
        pad = std::min<Eigen::Index>(x.samples() - 1,
                                     static_cast<Eigen::Index>(std::ceil(half_width / x.dt)));
        input = mirror_pad(x, pad);
    }

    TransformCube cube = wavelet_transform(input, wav, grid, /*derivatives=*/2);
    if (pad > 0) {
        for (auto& plane : cube.w) plane = ComplexMatrix(plane.middleCols(pad, x.samples()));
        for (auto& plane : cube.wt) plane = ComplexMatrix(plane.middleCols(pad, x.samples()));
        for (auto& plane : cube.wtt) plane = ComplexMatrix(plane.middleCols(pad, x.samples()));
        cube.time_origin = x.time_origin;
    }

    const RealMatrix norm2 = cube.norm_squared();
    const double floor = cfg.magnitude_floor_rel * std::sqrt(norm2.maxCoeff());
    auto points = detect_ridge_points(cube, floor);
    std::vector<RidgeCurve> curves =
        chain_ridges(points, cfg.max_level_jump * std::abs(grid.log_spacing()),
                     cfg.resolved_min_cycles(), x.dt);
    for (RidgeCurve& c : curves) annotate_curve(c, cube);

    PipelineResult result;
    std::vector<RidgeSummary> summaries;
    result.ridges = merge_overlaps(std::move(curves), x.dt);
    for (std::size_t i = 0; i < result.ridges.size(); ++i) {
        const RidgeCurve& c = result.ridges[i];
        RidgeSummary s;
        s.id = static_cast<int>(i);
        s.t_begin = c.t_begin();
        s.t_end = c.t_end();
        s.cycles = c.cycles;
        double mag = 0.0;
        for (const RidgePoint& p : c.points) mag += p.magnitude;
        s.mean_magnitude = mag / static_cast<double>(c.length());
        s.delta_proxy = detail::ridge_delta_proxy(c, cube);
        summaries.push_back(s);
    }

    result.residual = residual(x, result.ridges);

    if (x.channels() == 2) {
        for (const RidgeCurve& c : result.ridges) {
            if (c.frequency.size() == 0) continue;
            for (Eigen::Index idx : snapshot_times(c.frequency, x.dt)) {
                const EllipseParams e = ellipse_params(c.signal(0, idx), c.signal(1, idx));
                EllipseSnapshot snap;
                snap.t = c.points[idx].t;
                snap.center = {result.residual.data(0, snap.t), result.residual.data(1, snap.t)};
                snap.semi_major = e.a;
                snap.semi_minor = e.b;
                snap.orientation = e.theta;
                snap.phase = e.phi;
                result.ellipses.push_back(snap);
            }
        }
    }

    // suitability is reported against the worst measured ridge stability proxy
    double delta_used = 0.0;
    for (const RidgeSummary& s : summaries)
        if (std::isfinite(s.delta_proxy)) delta_used = std::max(delta_used, s.delta_proxy);

    nlohmann::json diag;
    diag["tool"] = "mvridge";
    diag["config"] = {{"beta", cfg.beta},
                      {"gamma", cfg.gamma},
                      {"levels", cfg.levels},
                      {"f_min_cyc", cfg.f_min_cyc},
                      {"f_max_cyc", cfg.f_max_cyc},
                      {"min_cycles", cfg.resolved_min_cycles()},
                      {"max_level_jump", cfg.max_level_jump},
                      {"magnitude_floor_rel", cfg.magnitude_floor_rel},
                      {"mirror_padding", cfg.mirror_padding}};
    {
        std::string canon;
        for (double v : {cfg.beta, cfg.gamma, static_cast<double>(cfg.levels), cfg.f_min_cyc,
                         cfg.f_max_cyc, cfg.resolved_min_cycles(), cfg.max_level_jump,
                         cfg.magnitude_floor_rel, cfg.mirror_padding ? 1.0 : 0.0}) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g;", v);
            canon += buf;
        }
        char hex[20];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a(canon)));
        diag["config_hash"] = hex;
    }
    diag["input"] = {{"channels", x.channels()},
                     {"samples", x.samples()},
                     {"dt", x.dt},
                     {"time_origin", x.time_origin}};
    diag["wavelet"] = {{"peak_frequency", wav.peak_frequency()}, {"duration", wav.duration()}};
    diag["edge_width"] = {{"min", cube.edge_width.minCoeff()}, {"max", cube.edge_width.maxCoeff()}};
    diag["warnings"] = cube.warnings;
    if (delta_used > 0.0 && delta_used < 1.0) {
        const SuitabilityReport rep = wav.suitability(delta_used);
        nlohmann::json orders = nlohmann::json::array();
        for (const SuitabilityOrder& o : rep.orders)
            orders.push_back({{"p", o.p},
                              {"value", o.value},
                              {"bound", o.bound},
                              {"margin", o.margin},
                              {"pass", o.pass}});
        diag["suitability"] = {{"delta", rep.delta},
                               {"orders", orders},
                               {"duration", rep.duration},
                               {"duration_upper", rep.duration_upper},
                               {"duration_ok", rep.duration_ok},
                               {"all_pass", rep.all_pass}};
    }
    nlohmann::json ridges = nlohmann::json::array();
    Eigen::Index covered = 0;
    for (const RidgeSummary& s : summaries) {
        ridges.push_back({{"id", s.id},
                          {"t_begin", s.t_begin},
                          {"t_end", s.t_end},
                          {"samples", s.t_end - s.t_begin},
                          {"cycles", s.cycles},
                          {"mean_magnitude", s.mean_magnitude},
                          {"delta_proxy", s.delta_proxy}});
        covered += s.t_end - s.t_begin;
    }
    diag["ridges"] = ridges;
    diag["coverage_fraction"] = static_cast<double>(covered) / static_cast<double>(x.samples());
    diag["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.diagnostics = std::move(diag);
    return result;
}

}  // namespace mvridge
