#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvridge/ellipse.hpp"
#include "mvridge/ridge.hpp"
#include "mvridge/synth.hpp"
#include "mvridge/transform.hpp"
#include "mvridge/types.hpp"

namespace mvridge::io {

namespace detail {

using mvridge::detail::kTwoPi;

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);  // 17 significant digits round-trip exactly
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, const char* context) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw invalid_input(std::string(context) + ": cannot parse number '" + s + "'");
    return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

/// Infer the sample interval from a strictly increasing time column and reject
/// non-uniform grids (tolerance 1e-6 * dt).
inline double infer_dt(const Eigen::VectorXd& time) {
    if (time.size() < 2) throw invalid_input("time column: need at least 2 samples");
    const double dt = (time[time.size() - 1] - time[0]) / static_cast<double>(time.size() - 1);
    if (!(dt > 0.0)) throw invalid_input("time column must be strictly increasing");
    for (Eigen::Index i = 1; i < time.size(); ++i) {
        const double step = time[i] - time[i - 1];
        if (std::abs(step - dt) > 1e-6 * dt)
            throw invalid_input("time column is not uniform; resampling is out of scope");
    }
    return dt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// channel CSV: header `time,ch1,...,chN`
// ---------------------------------------------------------------------------

inline void write_channels_csv(const std::string& path, const MultivariateSeries& x,
                               const std::string& kind = "channels") {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write file: " + path);
    out << "# mvridge " << kind << " v1\n";
    out << "time";
    for (Eigen::Index c = 0; c < x.channels(); ++c) out << ",ch" << (c + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < x.samples(); ++i) {
        out << detail::format_double(x.time_at(i));
        for (Eigen::Index c = 0; c < x.channels(); ++c)
            out << ',' << detail::format_double(x.data(c, i));
        out << "\n";
    }
}

inline MultivariateSeries read_channels_csv(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    if (lines.size() < 3) throw invalid_input(path + ": need a header and at least 2 samples");
    const std::vector<std::string> header = detail::split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "time")
        throw invalid_input(path + ": expected header time,ch1,...,chN");
    const Eigen::Index n = static_cast<Eigen::Index>(header.size()) - 1;
    const Eigen::Index t = static_cast<Eigen::Index>(lines.size()) - 1;

    Eigen::VectorXd time(t);
    MultivariateSeries x;
    x.data.resize(n, t);
    for (Eigen::Index i = 0; i < t; ++i) {
        const auto fields = detail::split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
        if (static_cast<Eigen::Index>(fields.size()) != n + 1)
            throw invalid_input(path + ": wrong field count on data row");
        time[i] = detail::parse_double(fields[0], "time");
        for (Eigen::Index c = 0; c < n; ++c)
            x.data(c, i) = detail::parse_double(fields[static_cast<std::size_t>(c) + 1], "channel");
    }
    x.dt = detail::infer_dt(time);
    x.time_origin = time[0];
    if (!x.data.allFinite()) throw numeric_error(path + ": non-finite samples");
    return x;
}

// ---------------------------------------------------------------------------
// trajectory CSV: header `id,time,lat,lon`, one record id per file
// ---------------------------------------------------------------------------

struct TrajectoryRecord {
    std::string id;
    Eigen::VectorXd time;
    Eigen::VectorXd lat, lon;  // degrees
};

inline TrajectoryRecord read_trajectory_csv(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    if (lines.size() < 3) throw invalid_input(path + ": need a header and at least 2 samples");
    const std::vector<std::string> header = detail::split_csv_line(lines[0]);
    if (header.size() != 4 || header[0] != "id" || header[1] != "time")
        throw invalid_input(path + ": expected header id,time,lat,lon");
    const Eigen::Index t = static_cast<Eigen::Index>(lines.size()) - 1;
    TrajectoryRecord rec;
    rec.time.resize(t);
    rec.lat.resize(t);
    rec.lon.resize(t);
    for (Eigen::Index i = 0; i < t; ++i) {
        const auto fields = detail::split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
        if (fields.size() != 4) throw invalid_input(path + ": wrong field count on data row");
        if (i == 0) rec.id = fields[0];
        else if (fields[0] != rec.id) throw invalid_input(path + ": multiple record ids in one file");
        rec.time[i] = detail::parse_double(fields[1], "time");
        rec.lat[i] = detail::parse_double(fields[2], "lat");
        rec.lon[i] = detail::parse_double(fields[3], "lon");
    }
    return rec;
}

inline constexpr double kEarthRadiusKm = 6371.0;

/// Local tangent-plane projection about the record's mean position, in km:
/// x eastward from longitude, y northward from latitude.
inline MultivariateSeries latlon_to_xy(const TrajectoryRecord& traj,
                                       std::vector<std::string>* warnings = nullptr) {
    const Eigen::Index t = traj.time.size();
    if (t < 2) throw invalid_input("latlon_to_xy: need at least 2 samples");
    if ((traj.lat.array().abs() > 90.0).any())
        throw invalid_input("latlon_to_xy: latitude outside [-90, 90]");
    const double dt = detail::infer_dt(traj.time);

    const double lat0 = traj.lat.mean();
    const double lon0 = traj.lon.mean();
    const double span = std::max(traj.lat.maxCoeff() - traj.lat.minCoeff(),
                                 traj.lon.maxCoeff() - traj.lon.minCoeff());
    if (span >= 10.0 && warnings)
        warnings->push_back("trajectory spans >= 10 degrees; tangent-plane projection is strained");

    const double deg = mvridge::detail::kPi / 180.0;
    MultivariateSeries out;
    out.dt = dt;
    out.time_origin = traj.time[0];
    out.data.resize(2, t);
    for (Eigen::Index i = 0; i < t; ++i) {
        out.data(0, i) = kEarthRadiusKm * std::cos(lat0 * deg) * (traj.lon[i] - lon0) * deg;
        out.data(1, i) = kEarthRadiusKm * (traj.lat[i] - lat0) * deg;
    }
    return out;
}

// ---------------------------------------------------------------------------
// ridge CSV: one row per (merged) ridge sample
// ---------------------------------------------------------------------------

inline void write_ridge_csv(const std::string& path, const std::vector<RidgeCurve>& curves,
                            Eigen::Index channels, double dt, double time_origin) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write file: " + path);
    out << "# mvridge ridges v1; freq_cyc = freq_rad / (2 pi)\n";
    out << "t,scale,freq_rad,freq_cyc,edge";
    for (Eigen::Index c = 0; c < channels; ++c) out << ",re_" << (c + 1) << ",im_" << (c + 1);
    out << ",omega_hat,xi_hat";
    for (Eigen::Index c = 0; c < channels; ++c)
        out << ",bias_re_" << (c + 1) << ",bias_im_" << (c + 1);
    out << "\n";
    for (const RidgeCurve& curve : curves) {
        for (Eigen::Index i = 0; i < curve.length(); ++i) {
            const RidgePoint& p = curve.points[i];
            out << detail::format_double(time_origin + dt * static_cast<double>(p.t));
            out << ',' << detail::format_double(p.scale);
            out << ',' << detail::format_double(p.frequency);
            out << ',' << detail::format_double(p.frequency / detail::kTwoPi);
            out << ',' << (p.edge ? 1 : 0);
            for (Eigen::Index c = 0; c < channels; ++c) {
                const Complex v = curve.annotated() ? curve.signal(c, i) : p.value[c];
                out << ',' << detail::format_double(v.real()) << ',' << detail::format_double(v.imag());
            }
            const double om = curve.frequency.size() ? curve.frequency[i] : p.frequency;
            const double xi = curve.curvature.size() ? curve.curvature[i]
                                                     : std::numeric_limits<double>::quiet_NaN();
            out << ',' << detail::format_double(om) << ',' << detail::format_double(xi);
            for (Eigen::Index c = 0; c < channels; ++c) {
                const Complex b = curve.bias.cols() ? curve.bias(c, i) : Complex{0.0, 0.0};
                out << ',' << detail::format_double(b.real()) << ',' << detail::format_double(b.imag());
            }
            out << "\n";
        }
    }
}

/// What the `ellipse` subcommand needs back from a ridge CSV.
struct RidgeTable {
    Eigen::VectorXd time;
    ComplexMatrix signal;        // channels x rows
    Eigen::VectorXd omega_hat;
    double dt = 1.0;
};

inline RidgeTable read_ridge_csv(const std::string& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    if (lines.size() < 2) throw invalid_input(path + ": empty ridge file");
    const auto header = detail::split_csv_line(lines[0]);
    Eigen::Index channels = 0;
    for (const auto& h : header)
        if (h.rfind("re_", 0) == 0) ++channels;
    if (channels == 0 || header.size() < static_cast<std::size_t>(7 + 4 * channels))
        throw invalid_input(path + ": not a ridge CSV");
    const Eigen::Index rows = static_cast<Eigen::Index>(lines.size()) - 1;
    RidgeTable tab;
    tab.time.resize(rows);
    tab.signal.resize(channels, rows);
    tab.omega_hat.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto f = detail::split_csv_line(lines[static_cast<std::size_t>(i) + 1]);
        tab.time[i] = detail::parse_double(f[0], "t");
        for (Eigen::Index c = 0; c < channels; ++c) {
            tab.signal(c, i) = Complex{detail::parse_double(f[static_cast<std::size_t>(5 + 2 * c)], "re"),
                                       detail::parse_double(f[static_cast<std::size_t>(6 + 2 * c)], "im")};
        }
        tab.omega_hat[i] = detail::parse_double(f[static_cast<std::size_t>(5 + 2 * channels)], "omega_hat");
    }
    double dt = 1.0;
    for (Eigen::Index i = 1; i < rows; ++i) {
        const double step = tab.time[i] - tab.time[i - 1];
        if (step > 0.0) { dt = step; break; }
    }
    tab.dt = dt;
    return tab;
}

// ---------------------------------------------------------------------------
// ellipse CSV: t,cx,cy,a,b,theta,phi
// ---------------------------------------------------------------------------

inline void write_ellipse_csv(const std::string& path, const std::vector<EllipseSnapshot>& snaps,
                              double dt, double time_origin) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write file: " + path);
    out << "# mvridge ellipses v1\n";
    out << "t,cx,cy,a,b,theta,phi\n";
    for (const EllipseSnapshot& s : snaps) {
        out << detail::format_double(time_origin + dt * static_cast<double>(s.t)) << ','
            << detail::format_double(s.center[0]) << ',' << detail::format_double(s.center[1]) << ','
            << detail::format_double(s.semi_major) << ',' << detail::format_double(s.semi_minor) << ','
            << detail::format_double(s.orientation) << ',' << detail::format_double(s.phase) << "\n";
    }
}

// ---------------------------------------------------------------------------
// transform cube: raw little-endian complex128 block plus a JSON sidecar
// ---------------------------------------------------------------------------

inline void dump_cube(const std::string& prefix, const TransformCube& cube) {
    static_assert(sizeof(Complex) == 16, "complex128 layout expected");
    std::ofstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw invalid_input("cannot write file: " + prefix + ".bin");
    auto write_planes = [&](const std::vector<ComplexMatrix>& planes) {
        for (const ComplexMatrix& m : planes)
            bin.write(reinterpret_cast<const char*>(m.data()),
                      static_cast<std::streamsize>(sizeof(Complex) * static_cast<std::size_t>(m.size())));
    };
    write_planes(cube.w);
    write_planes(cube.wt);
    write_planes(cube.wtt);

    nlohmann::json j;
    j["format"] = "mvridge-cube";
    j["version"] = 1;
    j["channels"] = cube.channels();
    j["levels"] = cube.levels();
    j["samples"] = cube.samples();
    j["dtype"] = "complex128";
    j["byte_order"] = "little";
    j["order"] = "plane,channel,scale,time";
    std::vector<std::string> planes = {"w"};
    if (cube.has_wt()) planes.push_back("wt");
    if (cube.has_wtt()) planes.push_back("wtt");
    j["planes"] = planes;
    j["beta"] = cube.wavelet.beta;
    j["gamma"] = cube.wavelet.gamma;
    j["dt"] = cube.dt;
    j["time_origin"] = cube.time_origin;
    j["frequencies_rad"] = std::vector<double>(cube.grid.frequencies.begin(), cube.grid.frequencies.end());
    j["edge_width"] = std::vector<int>(cube.edge_width.begin(), cube.edge_width.end());
    j["warnings"] = cube.warnings;
    std::ofstream side(prefix + ".json");
    if (!side) throw invalid_input("cannot write file: " + prefix + ".json");
    side << j.dump(2) << "\n";
}

inline TransformCube load_cube(const std::string& prefix) {
    std::ifstream side(prefix + ".json");
    if (!side) throw invalid_input("cannot open file: " + prefix + ".json");
    nlohmann::json j;
    side >> j;
    if (j.value("format", "") != std::string("mvridge-cube"))
        throw invalid_input(prefix + ".json: not a cube sidecar");

    TransformCube cube;
    const Eigen::Index n = j.at("channels").get<Eigen::Index>();
    const Eigen::Index s = j.at("levels").get<Eigen::Index>();
    const Eigen::Index t = j.at("samples").get<Eigen::Index>();
    cube.wavelet = MorseWavelet(j.at("beta").get<double>(), j.at("gamma").get<double>());
    cube.dt = j.at("dt").get<double>();
    cube.time_origin = j.at("time_origin").get<double>();
    const auto freqs = j.at("frequencies_rad").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(freqs.size()) != s)
        throw invalid_input(prefix + ".json: frequency count mismatch");
    cube.grid.peak_frequency = cube.wavelet.peak_frequency();
    cube.grid.frequencies = Eigen::Map<const Eigen::VectorXd>(freqs.data(), s);
    cube.grid.scales = (cube.grid.peak_frequency / cube.grid.frequencies.array()).matrix();
    const auto widths = j.at("edge_width").get<std::vector<int>>();
    cube.edge_width = Eigen::Map<const Eigen::VectorXi>(widths.data(), static_cast<Eigen::Index>(widths.size()));
    if (j.contains("warnings")) cube.warnings = j.at("warnings").get<std::vector<std::string>>();

    std::ifstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw invalid_input("cannot open file: " + prefix + ".bin");
    auto read_planes = [&](std::vector<ComplexMatrix>& planes) {
        planes.assign(static_cast<std::size_t>(n), ComplexMatrix(s, t));
        for (ComplexMatrix& m : planes) {
            bin.read(reinterpret_cast<char*>(m.data()),
                     static_cast<std::streamsize>(sizeof(Complex) * static_cast<std::size_t>(m.size())));
            if (!bin) throw invalid_input(prefix + ".bin: truncated cube data");
        }
    };
    const auto planes = j.at("planes").get<std::vector<std::string>>();
    for (const std::string& name : planes) {
        if (name == "w") read_planes(cube.w);
        else if (name == "wt") read_planes(cube.wt);
        else if (name == "wtt") read_planes(cube.wtt);
        else throw invalid_input(prefix + ".json: unknown plane '" + name + "'");
    }
    if (cube.w.empty()) throw invalid_input(prefix + ".json: cube lacks the w plane");
    return cube;
}

// ---------------------------------------------------------------------------
// synthetic spec as JSON (CLI `synth --spec`)
// ---------------------------------------------------------------------------

inline SyntheticSpec spec_from_json(const nlohmann::json& j) {
    SyntheticSpec spec;
    const std::string kind = j.value("kind", "pure_oscillation");
    if (kind == "pure_oscillation") spec.kind = SyntheticSpec::Kind::pure_oscillation;
    else if (kind == "phase_signal") spec.kind = SyntheticSpec::Kind::phase_signal;
    else if (kind == "chirp") spec.kind = SyntheticSpec::Kind::chirp;
    else if (kind == "gaussian_envelope") spec.kind = SyntheticSpec::Kind::gaussian_envelope;
    else if (kind == "modulated_ellipse") spec.kind = SyntheticSpec::Kind::modulated_ellipse;
    else throw invalid_input("unknown synthetic kind: " + kind);
    spec.channels = j.value("channels", spec.channels);
    spec.samples = j.value("samples", static_cast<std::int64_t>(spec.samples));
    spec.dt = j.value("dt", spec.dt);
    if (j.contains("freq_cyc")) spec.omega = detail::kTwoPi * j.at("freq_cyc").get<double>();
    if (j.contains("omega")) spec.omega = j.at("omega").get<double>();
    spec.chirp_rate = j.value("chirp_rate", spec.chirp_rate);
    spec.sweep = j.value("sweep", spec.sweep);
    spec.fm_depth = j.value("fm_depth", spec.fm_depth);
    spec.fm_rate = j.value("fm_rate", spec.fm_rate);
    spec.sigma = j.value("sigma", spec.sigma);
    spec.center = j.value("center", spec.center);
    spec.ell_a = j.value("ell_a", spec.ell_a);
    spec.ell_b = j.value("ell_b", spec.ell_b);
    spec.ell_breathe = j.value("ell_breathe", spec.ell_breathe);
    spec.ell_theta_rate = j.value("ell_theta_rate", spec.ell_theta_rate);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("coefficients")) {
        for (const auto& pair : j.at("coefficients"))
            spec.coefficients.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    return spec;
}

}  // namespace mvridge::io
