#include "cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "t1moco/error.hpp"
#include "t1moco/io.hpp"
#include "t1moco/metrics.hpp"
#include "t1moco/optimizer.hpp"
#include "t1moco/parallel.hpp"
#include "t1moco/phantom.hpp"
#include "t1moco/png_export.hpp"

namespace t1moco::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void diagnose(std::ostream& err, const std::string& kind, const std::string& message, int exit_code)
{
    err << json{{"schema", kDiagnosticSchema},
                {"version", io::kFormatVersion},
                {"error", kind},
                {"message", message},
                {"exit_code", exit_code}}
               .dump()
        << '\n';
}

struct FitOptions {
    std::string input;
    std::string masks;
    std::string config;
    std::string out;
    std::vector<std::string> settings;
    std::optional<int> outer_iterations;
    std::optional<double> lambda_seg;
    std::optional<int> reference_index;
};

void add_fit_options(CLI::App& cmd, FitOptions& o, bool with_masks)
{
    cmd.add_option("--in", o.input, "series manifest (series.json)")->required();
    if (with_masks) cmd.add_option("--masks", o.masks, "mask manifest (masks.json) for the segmentation term");
    cmd.add_option("--config", o.config, "key = value config file");
    cmd.add_option("--out", o.out, "output directory")->required();
    cmd.add_option("--set", o.settings, "config override key=value (repeatable)");
    cmd.add_option("--outer-iterations", o.outer_iterations);
    cmd.add_option("--lambda-seg", o.lambda_seg);
    cmd.add_option("--reference-index", o.reference_index);
}

FitConfig resolve_config(const FitOptions& o)
{
    FitConfig c = o.config.empty() ? FitConfig{} : io::load_config(o.config);
    std::string overrides;
    for (const std::string& s : o.settings) overrides += s + '\n';
    c = io::parse_config(overrides, c);
    if (o.outer_iterations) c.outer_iterations = *o.outer_iterations;
    if (o.lambda_seg) c.lambda_seg = *o.lambda_seg;
    if (o.reference_index) c.reference_index = *o.reference_index;
    validate_config(c);
    return c;
}

void run_fit(const FitOptions& o, bool corrected, std::ostream& out)
{
    const FitConfig config = resolve_config(o);
    const ImageSeries series = io::load_series(o.input);
    JointSolution solution;
    if (corrected) {
        std::optional<MaskSet> masks;
        if (!o.masks.empty()) masks = io::load_masks(o.masks);
        solution = joint_fit(series, config, masks ? &*masks : nullptr);
    } else {
        solution = static_solution(series, fit_uncorrected(series, config), config.reference_index);
    }
    io::save_solution(o.out, solution);
    const std::string report = io::fit_report_json(solution, config, corrected);
    io::write_text(fs::path(o.out) / "fit_report.json", report);
    out << report;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Joint motion correction and T1 mapping for inversion-recovery series", "t1moco"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: T1MOCO_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    PhantomConfig pc;
    std::uint64_t seed = 0;
    std::string phantom_out;
    CLI::App* phantom = app.add_subcommand("phantom", "generate a synthetic moving-heart phantom");
    phantom->add_option("--seed", seed, "random seed")->required();
    phantom->add_option("--out", phantom_out, "output directory")->required();
    phantom->add_option("--rows", pc.rows)->capture_default_str();
    phantom->add_option("--cols", pc.cols)->capture_default_str();
    phantom->add_option("--frames", pc.frames)->capture_default_str();
    phantom->add_option("--motion-min", pc.motion_min, "rigid shift range, voxels")->capture_default_str();
    phantom->add_option("--motion-max", pc.motion_max)->capture_default_str();
    phantom->add_option("--deformation", pc.deformation, "non-rigid amplitude, voxels")->capture_default_str();
    phantom->add_option("--snr", pc.snr, "peak M0 over noise sigma; 0 disables noise")->capture_default_str();

    FitOptions fit_opts;
    CLI::App* fit = app.add_subcommand("fit", "joint registration and T1 fit");
    add_fit_options(*fit, fit_opts, true);

    FitOptions base_opts;
    CLI::App* fit_uncorrected_cmd = app.add_subcommand("fit-uncorrected", "voxelwise T1 fit without registration");
    add_fit_options(*fit_uncorrected_cmd, base_opts, false);

    std::string solution_path, masks_path, truth_path, report_path, hd_mode = "max";
    bool pooled = false;
    int integration_steps = 7;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a solution against masks");
    eval->add_option("--solution", solution_path, "solution.json")->required();
    eval->add_option("--masks", masks_path, "masks.json")->required();
    eval->add_option("--truth", truth_path, "phantom.json for T1 error");
    eval->add_option("--out", report_path, "report file (default: stdout only)");
    eval->add_option("--hausdorff", hd_mode, "max or p95")->check(CLI::IsMember({"max", "p95"}));
    eval->add_flag("--pooled-r2", pooled, "one R^2 over all myocardial samples");
    eval->add_option("--integration-steps", integration_steps)->capture_default_str()->check(CLI::PositiveNumber);

    std::string maps_path, png_path;
    std::vector<double> range{0.0, 2500.0};
    CLI::App* export_cmd = app.add_subcommand("export", "render the T1 map as a colour PNG");
    export_cmd->add_option("--maps", maps_path, "solution.json")->required();
    export_cmd->add_option("--png", png_path, "output PNG")->required();
    export_cmd->add_option("--range", range, "display range min max in ms")->expected(2)->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        diagnose(err, "usage", e.what(), kUsage);
        const CLI::App* failing = &app;
        for (CLI::App* sub : app.get_subcommands()) failing = sub;
        err << failing->help();
        return kUsage;
    }

    try {
        if (threads > 0) set_thread_count(threads);
        if (phantom->parsed()) {
            const PhantomScene scene = generate_phantom(pc, seed);
            io::save_phantom(phantom_out, scene, pc);
        } else if (fit->parsed()) {
            run_fit(fit_opts, true, out);
        } else if (fit_uncorrected_cmd->parsed()) {
            run_fit(base_opts, false, out);
        } else if (eval->parsed()) {
            const JointSolution solution = io::load_solution(solution_path);
            const MaskSet masks = io::load_masks(masks_path);
            std::optional<PhantomScene> truth;
            if (!truth_path.empty()) truth = io::load_phantom(truth_path);
            EvalOptions options;
            options.pooled_r2 = pooled;
            options.hausdorff_mode = hd_mode == "p95" ? HausdorffMode::Percentile95 : HausdorffMode::Maximum;
            const EvalReport report =
                evaluate(solution, masks, truth ? &*truth : nullptr, options, integration_steps);
            const std::string text = io::report_json(report, options);
            if (!report_path.empty()) io::write_text(report_path, text);
            out << text;
        } else if (export_cmd->parsed()) {
            const JointSolution solution = io::load_solution(maps_path);
            export_t1_png(solution.maps, range[0], range[1], png_path);
        }
    } catch (const Error& e) {
        const int code = static_cast<int>(e.category());
        diagnose(err, std::string(to_string(e.code())), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        diagnose(err, "internal", e.what(), kFailure);
        return kFailure;
    }
    return kSuccess;
}

}  // namespace t1moco::cli
