#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mtload/cloud.hpp"
#include "mtload/excitation.hpp"
#include "mtload/harness/scenario.hpp"
#include "mtload/harness/table.hpp"
#include "mtload/species.hpp"

namespace mtload::harness {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Scenario resolved into SI-valued physics inputs.
struct World {
    SpeciesData species;
    QuadrupoleField field;
    LightField light;
    MotCloud mot;
    double mt_temperature = 0.0;  // K
    double mean_m_d = 0.0;
    double mu_bar = 0.0;          // J/T
    double mt_atom_number = 0.0;
    double efficiency = 0.0;
    double sigma_ed = 0.0;        // m^2
    double background_rate = 0.0; // 1/s
    bool apply_overlap = false;
};

// Throws ConfigError naming the offending key.
World build_world(const Scenario& scenario);

// One command per subcommand; each is a pure function of the scenario (whose
// noise.seed carries the seed).
ResultTable cmd_simulate_loading(const Scenario& scenario);
ResultTable cmd_simulate_decay(const Scenario& scenario);
ResultTable cmd_simulate_image(const Scenario& scenario);
ResultTable cmd_figure2(const Scenario& scenario);
ResultTable cmd_figure3(const Scenario& scenario);
ResultTable cmd_figure4(const Scenario& scenario);
ResultTable cmd_mc_transfer(const Scenario& scenario);

struct FitCommandOptions {
    std::string x_column;      // linear fit; default: first column
    std::string y_column;      // linear fit; default: second column
    std::string sigma_column;  // linear fit; optional uncertainties
    bool proportional = false; // linear fit; reweight for signal-proportional noise
    std::optional<double> t0;  // two-body fit; default decay.t0_s
};

struct FitOutcome {
    ResultTable table;
    bool converged = false;
    std::string message;
};

// fitter: loading | linear | image | two-body
FitOutcome cmd_fit(const CsvData& data, const std::string& fitter, const FitCommandOptions& options,
                   const Scenario& scenario, const std::string& source);

// Dispatches a simulation subcommand by name; throws ConfigError for unknown names.
ResultTable run_command(const std::string& name, const Scenario& scenario);

}  // namespace mtload::harness
