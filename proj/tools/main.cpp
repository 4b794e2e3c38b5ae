// mvridge: extraction of common modulated oscillations from multichannel
// time series via analytic wavelet transforms and ridge analysis.
//
// Subcommands: synth | transform | ridges | extract | ellipse
// Exit codes: 0 success, 2 usage, 3 input, 4 numeric (Nyquist/NaN).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <mvridge/mvridge.hpp>

namespace {

using namespace mvridge;

constexpr double kTwoPi = mvridge::detail::kTwoPi;

struct SynthArgs {
    std::string kind = "pure_oscillation";
    std::string spec_path;
    std::string out = "observed.csv";
    std::string truth_path;
    std::uint64_t seed = 0;
    std::int64_t samples = 1024;
    double dt = 1.0;
    int channels = 1;
    double freq_cyc = 0.05;
    double chirp_rate_cyc = 0.0;
    double sweep = 0.0;
    double fm_depth = 0.0;
    double fm_rate_cyc = 0.0;
    double sigma = 0.0;
    double center = -1.0;
    double noise = 0.0;
    double amplitude = 14.0;
    double ell_a = 1.0, ell_b = 0.5, ell_breathe = 0.0, ell_theta_rate_cyc = 0.0;
};

struct ConfigArgs {
    PipelineConfig cfg;
    void attach(CLI::App* cmd) {
        cmd->add_option("--beta", cfg.beta, "Morse wavelet beta")->capture_default_str();
        cmd->add_option("--gamma", cfg.gamma, "Morse wavelet gamma")->capture_default_str();
        cmd->add_option("--levels", cfg.levels, "number of scale levels")->capture_default_str();
        cmd->add_option("--fmin", cfg.f_min_cyc, "lowest analysis frequency, cycles per time unit")
            ->capture_default_str();
        cmd->add_option("--fmax", cfg.f_max_cyc, "highest analysis frequency, cycles per time unit")
            ->capture_default_str();
        cmd->add_option("--min-cycles", cfg.min_cycles,
                        "minimum ridge duration in completed cycles (default 2P)");
        cmd->add_option("--max-jump", cfg.max_level_jump, "chaining bound, grid levels per sample")
            ->capture_default_str();
        cmd->add_option("--floor", cfg.magnitude_floor_rel,
                        "ridge magnitude floor relative to the transform maximum")
            ->capture_default_str();
        cmd->add_flag("--pad", cfg.mirror_padding, "mirror-pad by one wavelet half-width");
    }
};

MultivariateSeries load_input(const std::string& input, const std::string& traj) {
    if (!traj.empty()) {
        std::vector<std::string> warnings;
        const MultivariateSeries x = io::latlon_to_xy(io::read_trajectory_csv(traj), &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        return x;
    }
    return io::read_channels_csv(input);
}

int run_synth(const SynthArgs& a) {
    if (a.kind == "float_like") {
        const MultivariateSeries x =
            float_like_trajectory(a.seed, a.samples, a.dt, a.amplitude);
        io::write_channels_csv(a.out, x);
        std::cout << "wrote " << a.out << " (" << x.channels() << " channels, " << x.samples()
                  << " samples)\n";
        return 0;
    }

    SyntheticSpec spec;
    if (!a.spec_path.empty()) {
        std::ifstream in(a.spec_path);
        if (!in) throw invalid_input("cannot open spec: " + a.spec_path);
        nlohmann::json j;
        in >> j;
        spec = io::spec_from_json(j);
    } else {
        nlohmann::json j;
        j["kind"] = a.kind;
        spec = io::spec_from_json(j);
        spec.samples = a.samples;
        spec.dt = a.dt;
        spec.channels = a.channels;
        spec.omega = kTwoPi * a.freq_cyc;
        spec.chirp_rate = kTwoPi * a.chirp_rate_cyc;
        spec.sweep = a.sweep;
        spec.fm_depth = a.fm_depth;
        spec.fm_rate = kTwoPi * a.fm_rate_cyc;
        spec.sigma = a.sigma;
        spec.center = a.center;
        spec.noise_sigma = a.noise;
        spec.seed = a.seed;
        spec.ell_a = a.ell_a;
        spec.ell_b = a.ell_b;
        spec.ell_breathe = a.ell_breathe;
        spec.ell_theta_rate = kTwoPi * a.ell_theta_rate_cyc;
    }
    const SyntheticSignal sig = generate(spec);
    io::write_channels_csv(a.out, sig.observed);
    std::cout << "wrote " << a.out << "\n";
    if (!a.truth_path.empty() && sig.truth.has_moments) {
        std::ofstream out(a.truth_path);
        if (!out) throw invalid_input("cannot write truth: " + a.truth_path);
        out << "# mvridge synth truth v1\n";
        out << "time,omega,upsilon,xi\n";
        for (Eigen::Index i = 0; i < sig.observed.samples(); ++i) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", sig.observed.time_at(i),
                          sig.truth.omega[i], sig.truth.upsilon[i], sig.truth.xi[i]);
            out << buf;
        }
        std::cout << "wrote " << a.truth_path << "\n";
    }
    return 0;
}

int run_transform(const std::string& input, const std::string& traj, const ConfigArgs& conf,
                  int derivatives, const std::string& prefix) {
    const MultivariateSeries x = load_input(input, traj);
    detail::validate_config(conf.cfg, x.dt);
    const MorseWavelet wav = conf.cfg.wavelet();
    const ScaleGrid grid =
        ScaleGrid::logspace(conf.cfg.levels, kTwoPi * conf.cfg.f_min_cyc,
                            kTwoPi * conf.cfg.f_max_cyc, wav.peak_frequency());
    MultivariateSeries in = x;
    if (conf.cfg.mirror_padding) {
        const Eigen::Index pad = std::min<Eigen::Index>(
            x.samples() - 1,
            static_cast<Eigen::Index>(std::ceil(wav.duration() / (kTwoPi * conf.cfg.f_min_cyc * x.dt))));
        in = mirror_pad(x, pad);
    }
    const TransformCube cube = wavelet_transform(in, wav, grid, derivatives);
    for (const auto& w : cube.warnings) std::cerr << "warning: " << w << "\n";
    io::dump_cube(prefix, cube);
    std::cout << "wrote " << prefix << ".bin and " << prefix << ".json\n";
    return 0;
}

int run_ridges(const std::string& prefix, const ConfigArgs& conf, const std::string& out,
               const std::string& diag_path) {
    const TransformCube cube = io::load_cube(prefix);
    const double floor =
        conf.cfg.magnitude_floor_rel * std::sqrt(cube.norm_squared().maxCoeff());
    auto points = detect_ridge_points(cube, floor);
    const double min_cycles = (conf.cfg.min_cycles < 0.0)
                                  ? 2.0 * cube.wavelet.duration()
                                  : conf.cfg.min_cycles;
    auto curves = chain_ridges(points, conf.cfg.max_level_jump * std::abs(cube.grid.log_spacing()),
                               min_cycles, cube.dt);
    for (auto& c : curves) annotate_curve(c, cube);
    const auto merged = merge_overlaps(std::move(curves), cube.dt);
    io::write_ridge_csv(out, merged, cube.channels(), cube.dt, cube.time_origin);
    std::cout << "wrote " << out << " (" << merged.size() << " ridges)\n";
    if (!diag_path.empty()) {
        nlohmann::json diag;
        diag["tool"] = "mvridge";
        diag["source_cube"] = prefix;
        nlohmann::json ridges = nlohmann::json::array();
        for (std::size_t i = 0; i < merged.size(); ++i)
            ridges.push_back({{"id", i},
                              {"t_begin", merged[i].t_begin()},
                              {"t_end", merged[i].t_end()},
                              {"cycles", merged[i].cycles}});
        diag["ridges"] = ridges;
        std::ofstream js(diag_path);
        if (!js) throw invalid_input("cannot write diagnostics: " + diag_path);
        js << diag.dump(2) << "\n";
        std::cout << "wrote " << diag_path << "\n";
    }
    return 0;
}

int run_extract(const std::string& input, const std::string& traj, const ConfigArgs& conf,
                const std::string& ridges_path, const std::string& residual_path,
                const std::string& ellipses_path, const std::string& diag_path) {
    const MultivariateSeries x = load_input(input, traj);
    const PipelineResult result = run_pipeline(conf.cfg, x);
    io::write_ridge_csv(ridges_path, result.ridges, x.channels(), x.dt, x.time_origin);
    io::write_channels_csv(residual_path, result.residual, "residual");
    std::cout << "wrote " << ridges_path << " (" << result.ridges.size() << " ridges)\n";
    std::cout << "wrote " << residual_path << "\n";
    if (x.channels() == 2) {
        io::write_ellipse_csv(ellipses_path, result.ellipses, x.dt, x.time_origin);
        std::cout << "wrote " << ellipses_path << " (" << result.ellipses.size() << " snapshots)\n";
    }
    std::ofstream js(diag_path);
    if (!js) throw invalid_input("cannot write diagnostics: " + diag_path);
    js << result.diagnostics.dump(2) << "\n";
    std::cout << "wrote " << diag_path << "\n";
    return 0;
}

int run_ellipse(const std::string& ridges_path, const std::string& residual_path,
                const std::string& out) {
    const io::RidgeTable tab = io::read_ridge_csv(ridges_path);
    if (tab.signal.rows() != 2)
        throw invalid_input("ellipse: ridge file must carry exactly 2 channels");

    MultivariateSeries centers;
    bool have_centers = false;
    if (!residual_path.empty()) {
        centers = io::read_channels_csv(residual_path);
        if (centers.channels() != 2) throw invalid_input("ellipse: residual must have 2 channels");
        have_centers = true;
    }

    std::vector<EllipseSnapshot> snaps;
    for (Eigen::Index idx : snapshot_times(tab.omega_hat, tab.dt)) {
        const EllipseParams e = ellipse_params(tab.signal(0, idx), tab.signal(1, idx));
        EllipseSnapshot s;
        s.t = idx;
        if (have_centers) {
            const Eigen::Index k = static_cast<Eigen::Index>(
                std::llround((tab.time[idx] - centers.time_origin) / centers.dt));
            if (k >= 0 && k < centers.samples()) s.center = {centers.data(0, k), centers.data(1, k)};
        }
        s.semi_major = e.a;
        s.semi_minor = e.b;
        s.orientation = e.theta;
        s.phase = e.phi;
        snaps.push_back(s);
    }
    // snapshot rows carry the ridge table's own time axis
    std::ofstream outf(out);
    if (!outf) throw invalid_input("cannot write file: " + out);
    outf << "# mvridge ellipses v1\n";
    outf << "t,cx,cy,a,b,theta,phi\n";
    for (const EllipseSnapshot& s : snaps) {
        char buf[320];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      tab.time[s.t], s.center[0], s.center[1], s.semi_major, s.semi_minor,
                      s.orientation, s.phase);
        outf << buf;
    }
    std::cout << "wrote " << out << " (" << snaps.size() << " snapshots)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multivariate wavelet ridge analysis"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic test signal");
    synth_cmd->add_option("--kind", synth_args.kind,
                          "pure_oscillation|phase_signal|chirp|gaussian_envelope|"
                          "modulated_ellipse|float_like")
        ->capture_default_str();
    synth_cmd->add_option("--spec", synth_args.spec_path, "JSON spec file (overrides flags)");
    synth_cmd->add_option("--seed", synth_args.seed, "random seed")->capture_default_str();
    synth_cmd->add_option("--samples", synth_args.samples)->capture_default_str();
    synth_cmd->add_option("--dt", synth_args.dt)->capture_default_str();
    synth_cmd->add_option("--channels", synth_args.channels)->capture_default_str();
    synth_cmd->add_option("--freq", synth_args.freq_cyc, "carrier frequency, cycles per time unit")
        ->capture_default_str();
    synth_cmd->add_option("--chirp-rate", synth_args.chirp_rate_cyc,
                          "frequency sweep rate, cycles per time unit squared");
    synth_cmd->add_option("--sweep", synth_args.sweep, "total fractional sweep for kind=chirp");
    synth_cmd->add_option("--fm-depth", synth_args.fm_depth);
    synth_cmd->add_option("--fm-rate", synth_args.fm_rate_cyc, "FM rate, cycles per time unit");
    synth_cmd->add_option("--sigma", synth_args.sigma, "gaussian envelope width, time units");
    synth_cmd->add_option("--center", synth_args.center, "envelope center time");
    synth_cmd->add_option("--noise", synth_args.noise, "white noise sigma per channel");
    synth_cmd->add_option("--amplitude", synth_args.amplitude, "float_like oscillation amplitude");
    synth_cmd->add_option("--ell-a", synth_args.ell_a);
    synth_cmd->add_option("--ell-b", synth_args.ell_b);
    synth_cmd->add_option("--ell-breathe", synth_args.ell_breathe);
    synth_cmd->add_option("--ell-theta-rate", synth_args.ell_theta_rate_cyc);
    synth_cmd->add_option("--out", synth_args.out, "observed CSV path")->capture_default_str();
    synth_cmd->add_option("--truth", synth_args.truth_path, "also write a truth CSV");

    std::string input, traj, cube_prefix = "cube";
    int derivatives = 2;
    ConfigArgs transform_conf;
    CLI::App* transform_cmd =
        app.add_subcommand("transform", "wavelet transform, dumped as a binary cube");
    transform_cmd->add_option("--input", input, "channel CSV (time,ch1,..,chN)");
    transform_cmd->add_option("--traj", traj, "trajectory CSV (id,time,lat,lon)");
    transform_cmd->add_option("--derivatives", derivatives, "time-derivative planes: 0, 1 or 2")
        ->capture_default_str();
    transform_cmd->add_option("--dump-cube", cube_prefix, "output prefix for .bin/.json")
        ->capture_default_str();
    transform_conf.attach(transform_cmd);

    std::string ridges_cube = "cube", ridges_out = "ridges.csv", ridges_diag;
    ConfigArgs ridges_conf;
    CLI::App* ridges_cmd = app.add_subcommand("ridges", "ridge analysis of a dumped cube");
    ridges_cmd->add_option("--cube", ridges_cube, "cube prefix from `transform --dump-cube`")
        ->capture_default_str();
    ridges_cmd->add_option("--out", ridges_out)->capture_default_str();
    ridges_cmd->add_option("--diagnostics", ridges_diag, "optional diagnostics JSON");
    ridges_conf.attach(ridges_cmd);

    std::string ex_input, ex_traj, ex_ridges = "ridges.csv", ex_residual = "residual.csv",
                ex_ellipses = "ellipses.csv", ex_diag = "diagnostics.json";
    ConfigArgs extract_conf;
    CLI::App* extract_cmd = app.add_subcommand("extract", "full pipeline: input to ridge/residual/"
                                                          "ellipse files plus diagnostics");
    extract_cmd->add_option("--input", ex_input, "channel CSV (time,ch1,..,chN)");
    extract_cmd->add_option("--traj", ex_traj, "trajectory CSV (id,time,lat,lon)");
    extract_cmd->add_option("--ridges", ex_ridges)->capture_default_str();
    extract_cmd->add_option("--residual", ex_residual)->capture_default_str();
    extract_cmd->add_option("--ellipses", ex_ellipses)->capture_default_str();
    extract_cmd->add_option("--diagnostics", ex_diag)->capture_default_str();
    extract_conf.attach(extract_cmd);

    std::string el_ridges = "ridges.csv", el_residual, el_out = "ellipses.csv";
    CLI::App* ellipse_cmd =
        app.add_subcommand("ellipse", "ellipse snapshots from a bivariate ridge CSV");
    ellipse_cmd->add_option("--ridges", el_ridges)->capture_default_str();
    ellipse_cmd->add_option("--residual", el_residual, "residual CSV for snapshot centers");
    ellipse_cmd->add_option("--out", el_out)->capture_default_str();

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (transform_cmd->parsed()) {
            if (input.empty() && traj.empty())
                throw CLI::RequiredError("transform: --input or --traj");
            return run_transform(input, traj, transform_conf, derivatives, cube_prefix);
        }
        if (ridges_cmd->parsed()) return run_ridges(ridges_cube, ridges_conf, ridges_out, ridges_diag);
        if (extract_cmd->parsed()) {
            if (ex_input.empty() && ex_traj.empty())
                throw CLI::RequiredError("extract: --input or --traj");
            return run_extract(ex_input, ex_traj, extract_conf, ex_ridges, ex_residual, ex_ellipses,
                               ex_diag);
        }
        if (ellipse_cmd->parsed()) return run_ellipse(el_ridges, el_residual, el_out);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const mvridge::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const mvridge::invalid_input& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
