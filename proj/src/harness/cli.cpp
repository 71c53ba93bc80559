#include "mtload/harness/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mtload/errors.hpp"
#include "mtload/estimation.hpp"
#include "mtload/harness/commands.hpp"

namespace mtload::harness {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct ReplayInfo {
    std::string command;
    Scenario scenario;
};

// Rebuilds the scenario and command recorded in a previous run's provenance lines.
ReplayInfo load_replay(const std::string& path) {
    std::istringstream in(read_file(path));
    const CsvData data = parse_csv(in, path);
    std::string text;
    std::string command;
    for (const auto& c : data.comments) {
        std::string_view line = c;
        while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        if (line.starts_with("scenario: ")) text += std::string(line.substr(10)) + "\n";
        else if (line.starts_with("command: ")) command = std::string(line.substr(9));
    }
    if (command.empty()) throw ConfigError("replay file has no 'command:' provenance line", "--replay");
    if (command.starts_with("fit")) throw ConfigError("fit outputs cannot be replayed; rerun fit on the input", "--replay");
    return {command, Scenario::parse(text, path)};
}

void emit(const ResultTable& table, const std::string& out_path, std::ostream& out) {
    if (out_path.empty() || out_path == "-") {
        table.write_csv(out);
        return;
    }
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::ios_base::failure("cannot write '" + out_path + "'");
    table.write_csv(file);
    if (!file) throw std::ios_base::failure("write failed for '" + out_path + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Continuous magnetic-trap loading toolkit", "mtload"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string scenario_path;
    std::optional<long> seed;
    std::string out_path;
    std::string format = "csv";
    std::string replay_path;
    std::vector<std::string> overrides;
    app.add_option("--scenario", scenario_path, "Scenario file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Random seed (overrides noise.seed)");
    app.add_option("--out", out_path, "Output file (default stdout)");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}));
    app.add_option("--set", overrides, "Override a scenario key: key=value");
    app.add_option("--replay", replay_path, "Re-run the command recorded in an output file")->check(CLI::ExistingFile);

    const std::vector<std::pair<std::string, std::string>> sims = {
        {"simulate-loading", "Loading curve N_MT(t) while the MOT is on"},
        {"simulate-decay", "Trap decay with two-body loss and volume growth"},
        {"simulate-image", "Synthetic column-density or slice image of the trapped cloud"},
        {"figure2", "Loading rate versus MOT atom number for several detunings"},
        {"figure3", "Trap loss rate versus excited MOT density times velocity"},
        {"figure4", "Trap temperature versus MOT temperature, analytic and Monte Carlo"},
        {"mc-transfer", "Monte Carlo transfer of MOT atoms into the quadrupole trap"},
    };
    std::vector<CLI::App*> sim_cmds;
    for (const auto& [name, help] : sims) sim_cmds.push_back(app.add_subcommand(name, help));

    auto* fit = app.add_subcommand("fit", "Fit a model to a data file");
    std::string fitter;
    std::string input;
    FitCommandOptions fit_opts;
    fit->add_option("fitter", fitter, "loading | linear | image | two-body")
        ->required()
        ->check(CLI::IsMember({"loading", "linear", "image", "two-body"}));
    fit->add_option("input", input, "CSV data file")->required();
    fit->add_option("--x", fit_opts.x_column, "Linear fit x column");
    fit->add_option("--y", fit_opts.y_column, "Linear fit y column");
    fit->add_option("--sigma", fit_opts.sigma_column, "Linear fit uncertainty column");
    fit->add_flag("--proportional", fit_opts.proportional, "Linear fit weighted for signal-proportional noise");
    fit->add_option("--t0", fit_opts.t0, "Background lifetime for the two-body fit (s)");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << "mtload " << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "mtload: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        std::string command;
        Scenario scenario;
        if (!replay_path.empty()) {
            if (!scenario_path.empty()) throw ConfigError("--replay and --scenario are exclusive", "--replay");
            auto info = load_replay(replay_path);
            command = info.command;
            scenario = std::move(info.scenario);
        } else if (!scenario_path.empty()) {
            scenario = Scenario::parse(read_file(scenario_path), scenario_path);
        }
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'", "--set");
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t");
                const auto b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            scenario.set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
        }
        if (seed) {
            if (*seed < 0) throw ConfigError("--seed must be nonnegative", "--seed");
            scenario.set("noise.seed", std::to_string(*seed));
        }

        for (std::size_t i = 0; i < sims.size(); ++i) {
            if (sim_cmds[i]->parsed()) {
                if (!command.empty() && command != sims[i].first)
                    throw ConfigError("replay file was produced by '" + command + "'", "--replay");
                command = sims[i].first;
            }
        }
        if (fit->parsed()) {
            if (!replay_path.empty()) throw ConfigError("fit cannot be combined with --replay", "--replay");
            std::istringstream in(read_file(input));
            const CsvData data = parse_csv(in, input);
            FitOutcome outcome = cmd_fit(data, fitter, fit_opts, scenario, input);
            emit(outcome.table, out_path, out);
            if (!outcome.converged) {
                err << "mtload: fit did not converge: " << outcome.message << "\n";
                return kExitNumeric;
            }
            return kExitOk;
        }
        if (command.empty()) {
            out << app.help();
            return kExitConfig;
        }
        emit(run_command(command, scenario), out_path, out);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "mtload: configuration error";
        if (!e.field.empty()) err << " [" << e.field << "]";
        err << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidInput& e) {
        err << "mtload: invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataParseError& e) {
        err << "mtload: data error: " << e.what() << "\n";
        return kExitIo;
    } catch (const MissingColumn& e) {
        err << "mtload: data error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        err << "mtload: I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericFailure& e) {
        err << "mtload: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::domain_error& e) {
        err << "mtload: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace mtload::harness
