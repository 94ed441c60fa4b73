// Command-line front end: scenario generation, session replay, paired
// evaluation, heatmap rendering, and config validation.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "guider/config.hpp"
#include "guider/heatmap.hpp"
#include "guider/io/pgm_io.hpp"
#include "guider/logging.hpp"
#include "guider/metrics.hpp"
#include "guider/replay.hpp"
#include "guider/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;

guider::Config load_or_default(const std::string& config_path) {
    if (config_path.empty()) {
        guider::Config config;
        config.validate();
        return config;
    }
    return guider::load_config(config_path);
}

int cmd_gen(const std::string& template_name, std::uint64_t seed,
            const std::string& config_path, const std::string& out_dir, double noise) {
    guider::scenario::ScenarioSpec spec;
    spec.tpl = guider::scenario::parse_template(template_name);
    spec.seed = seed;
    if (noise >= 0.0) {
        spec.base_noise_sigma = noise;
        spec.tcp_noise_sigma = noise / 2.0;
    }
    const auto config = load_or_default(config_path);
    const auto info = guider::scenario::generate_scenario(spec, config, out_dir);
    std::printf("generated %s in %s (nav contact %.1f s, command %.1f s)\n", info.name.c_str(),
                out_dir.c_str(), info.nav_contact_t, info.manip_command_t);
    return 0;
}

int cmd_replay(const std::string& log_dir, const std::string& config_path,
               const std::string& out_dir, std::uint64_t seed, bool dump_stages,
               const std::string& phase, bool ablate) {
    const auto config = load_or_default(config_path);
    const auto log = guider::replay::load_session_log(log_dir);

    guider::replay::ReplayOptions options;
    options.seed = seed;
    options.dump_stages = dump_stages;
    options.ablate_feasibility = ablate;
    options.out_dir = out_dir;
    if (phase == "nav") options.phase = guider::replay::Phase::Nav;
    else if (phase == "manip") options.phase = guider::replay::Phase::Manip;
    else if (phase == "both") options.phase = guider::replay::Phase::Both;
    else throw guider::ConfigError("--phase must be nav, manip, or both");

    const auto result = guider::replay::replay(log, config, options);
    guider::replay::write_outputs(result, config, options);

    auto report = [](const char* name, const guider::replay::PhaseTimeline& timeline) {
        const auto m = guider::replay::compute_phase_metrics(timeline);
        if (m.rtcp) std::printf("%s: rtcp=%.3f s", name, *m.rtcp);
        else std::printf("%s: rtcp=n/a", name);
        std::printf(" stability=%.1f%% contact_t=%.2f s\n", m.stability, m.contact_t);
    };
    if (result.nav) report("navigation", *result.nav);
    if (result.manip) report("manipulation", *result.manip);
    return 0;
}

int cmd_eval(const std::string& pairs_csv, const std::string& direction_name) {
    std::ifstream in(pairs_csv);
    if (!in) throw guider::IoError("cannot read " + pairs_csv);

    const auto direction = direction_name == "less" ? guider::metrics::TailDirection::Less
                                                    : guider::metrics::TailDirection::Greater;
    std::vector<std::pair<double, double>> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) {
            if (line_no == 1) continue; // header row
            throw guider::InputError(pairs_csv + ":" + std::to_string(line_no) +
                                     ": expected two numeric columns");
        }
        pairs.emplace_back(a, b);
    }
    if (pairs.empty()) throw guider::InputError(pairs_csv + ": no data rows");

    std::vector<double> first, second;
    for (const auto& [a, b] : pairs) {
        first.push_back(a);
        second.push_back(b);
    }
    const auto agg_a = guider::metrics::aggregate(first);
    const auto agg_b = guider::metrics::aggregate(second);
    const auto w = guider::metrics::wilcoxon_exact(pairs, direction);

    std::printf("n=%zu\n", pairs.size());
    std::printf("column_a: %.3f +/- %.3f (median +/- MAD)\n", agg_a.median, agg_a.mad);
    std::printf("column_b: %.3f +/- %.3f (median +/- MAD)\n", agg_b.median, agg_b.mad);
    std::printf("wilcoxon exact: p2=%.4g p1=%.4g r_bs=%+.2f (n_used=%d)\n", w.p_two, w.p_one,
                w.r_bs, w.n_used);
    return 0;
}

int cmd_render(const std::string& input, int width, int height, const std::string& out_path) {
    guider::ScalarField field;
    if (input.size() > 4 && input.substr(input.size() - 4) == ".f32") {
        if (width < 1 || height < 1)
            throw guider::ConfigError("render: .f32 input needs --width and --height");
        field = guider::io::read_field_f32(input, width, height);
    } else {
        const auto img = guider::io::read_pgm8(input);
        field = guider::ScalarField(img.width, img.height, 0.0);
        for (std::size_t i = 0; i < img.data.size(); ++i) field.data[i] = img.data[i] / 255.0;
    }
    guider::io::render_heatmap(field, out_path);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_check_config(const std::string& config_path) {
    const auto config = load_or_default(config_path);
    std::fputs(guider::serialize_config(config).c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-phase operator intent estimation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("gen", "Generate a synthetic session log");
    std::string template_name;
    double gen_noise = -1.0;
    gen->add_option("template", template_name,
                    "t1_direct | t2_base_redirect | t3_manip_redirect | t4_tool | t5_infeasible")
        ->required();
    gen->add_option("--seed", seed, "Master seed");
    gen->add_option("--config", config_path, "Config file (flat key=value)");
    gen->add_option("--out", out_dir, "Output directory");
    gen->add_option("--noise", gen_noise, "Odometry noise sigma in meters");

    auto* rep = app.add_subcommand("replay", "Replay a session log through the pipeline");
    std::string log_dir;
    std::string phase = "both";
    bool dump_stages = false;
    bool ablate = false;
    rep->add_option("log", log_dir, "Session log directory")->required();
    rep->add_option("--config", config_path, "Config file");
    rep->add_option("--out", out_dir, "Output directory");
    rep->add_option("--seed", seed, "Master seed");
    rep->add_option("--phase", phase, "nav | manip | both");
    rep->add_flag("--dump-stages", dump_stages, "Write per-stage image dumps");
    rep->add_flag("--ablate-feasibility", ablate,
                  "Force all feasibility masks to all-ones (geometry ablation)");

    auto* ev = app.add_subcommand("eval", "Aggregate paired metrics and run the exact test");
    std::string pairs_csv;
    std::string direction = "greater";
    ev->add_option("pairs", pairs_csv, "CSV with two numeric columns (a,b)")->required();
    ev->add_option("--direction", direction, "Pre-registered tail: greater | less");

    auto* ren = app.add_subcommand("render", "Render a scalar field as a PPM heatmap");
    std::string render_in, render_out = "heatmap.ppm";
    int render_w = 0, render_h = 0;
    ren->add_option("input", render_in, "PGM image or raw .f32 dump")->required();
    ren->add_option("--width", render_w, "Field width (for .f32)");
    ren->add_option("--height", render_h, "Field height (for .f32)");
    ren->add_option("--out", render_out, "Output PPM path");

    auto* check = app.add_subcommand("check-config", "Validate and print a config");
    check->add_option("--config", config_path, "Config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(template_name, seed, config_path, out_dir, gen_noise);
        if (rep->parsed())
            return cmd_replay(log_dir, config_path, out_dir, seed, dump_stages, phase, ablate);
        if (ev->parsed()) return cmd_eval(pairs_csv, direction);
        if (ren->parsed()) return cmd_render(render_in, render_w, render_h, render_out);
        if (check->parsed()) return cmd_check_config(config_path);
    } catch (const guider::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
