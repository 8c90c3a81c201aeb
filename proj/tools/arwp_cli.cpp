#include "arwp/experiment.hpp"
#include "arwp/parallel.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace arwp;

namespace {

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
}

void write_text(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << s;
}

std::string pick_dir(const std::string& flag, const std::string& from_config, const std::string& fallback) {
    if (!flag.empty()) return flag;
    if (!from_config.empty()) return from_config;
    return fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARWP particle samplers and Gaussian theory tools"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;

    auto* run = app.add_subcommand("run", "run a sampler experiment");
    run->add_option("config", config_path, "experiment JSON (or a metadata.json from a previous run)")->required();
    run->add_option("--output-dir", output_dir, "overrides output_dir");
    run->add_option("--seed", seed, "overrides seed");
    run->add_option("--threads", threads, "worker threads (0 = all cores)");

    auto* sweep = app.add_subcommand("sweep", "damping/step-size phase sweep of the covariance recursion");
    sweep->add_option("config", config_path)->required();
    sweep->add_option("--output-dir", output_dir);
    sweep->add_option("--threads", threads);

    auto* theory = app.add_subcommand("theory", "tabulate linearized rates and optimal parameters");
    theory->add_option("config", config_path)->required();
    theory->add_option("--output-dir", output_dir);

    auto* presets = app.add_subcommand("presets", "shipped experiment presets");
    auto* presets_list = presets->add_subcommand("list", "list preset files");
    presets->require_subcommand(1);
    std::string presets_dir = ARWP_PRESETS_DIR;
    presets_list->add_option("--dir", presets_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        set_thread_count(threads);
        if (*run) {
            Json j = read_json(config_path);
            if (seed) {
                Json& c = j.contains("config") ? j["config"] : j;
                c["seed"] = *seed;
            }
            ExperimentConfig cfg = parse_experiment(j);
            cfg.output_dir = pick_dir(output_dir, cfg.output_dir, "runs/" + cfg.name);
            ExperimentReport rep = run_experiment(cfg);
            write_report(rep, cfg.output_dir);
            std::cout << "wrote " << rep.rows.size() << " rows to " << cfg.output_dir << "\n";
            if (rep.diverged) {
                std::cerr << "diverged: " << rep.divergence_message << "\n";
                return 2;
            }
        } else if (*sweep) {
            SweepConfig cfg = parse_sweep(read_json(config_path));
            std::string dir = pick_dir(output_dir, cfg.output_dir, "runs/sweep");
            auto cells = phase_sweep(cfg);
            write_text(fs::path(dir) / "sweep.csv", format_sweep_csv(cells));
            write_text(fs::path(dir) / "metadata.json", Json{{"config", to_json(cfg)}}.dump(2) + "\n");
            std::size_t bad = 0;
            for (const auto& c : cells) bad += c.diverged;
            std::cout << "wrote " << cells.size() << " cells (" << bad << " divergent) to " << dir << "\n";
        } else if (*theory) {
            TheoryConfig cfg = parse_theory(read_json(config_path));
            std::string dir = pick_dir(output_dir, cfg.output_dir, "runs/theory");
            auto rows = theory_report(cfg);
            write_text(fs::path(dir) / "theory.csv", format_theory_csv(rows));
            write_text(fs::path(dir) / "metadata.json", Json{{"config", to_json(cfg)}}.dump(2) + "\n");
            std::cout << "wrote " << rows.size() << " rows to " << dir << "\n";
        } else if (*presets_list) {
            std::vector<std::string> names;
            for (const auto& entry : fs::directory_iterator(presets_dir))
                if (entry.path().extension() == ".json") names.push_back(entry.path().filename().string());
            std::sort(names.begin(), names.end());
            for (const auto& n : names) std::cout << (fs::path(presets_dir) / n).string() << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
