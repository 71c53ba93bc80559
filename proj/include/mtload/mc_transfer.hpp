#pragma once

// Monte Carlo bookkeeping of the MOT -> magnetic trap transfer. Atoms are drawn
// from the Gaussian, thermal MOT, assigned a Zeeman substate, and their kinetic
// plus trap potential energy at the moment of transfer is averaged. The virial
// theorem for a linear potential (V = 2 E_kin) then fixes the trap temperature,
// which gives an independent check of the closed-form prediction in cloud.hpp.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "mtload/cloud.hpp"
#include "mtload/species.hpp"

namespace mtload {

struct Particle {
    Point3 position;
    Point3 velocity;
    int zeeman_m = 0;  // m_d in [-4, 4]; m_d > 0 is low-field seeking
};

struct PumpingDistribution {
    static constexpr int kMaxM = 4;
    std::array<double, 2 * kMaxM + 1> probabilities{};  // index m + 4

    static PumpingDistribution point(int m);
    static PumpingDistribution uniform();

    double probability(int m) const { return probabilities.at(static_cast<std::size_t>(m + kMaxM)); }
    // Throws InvalidInput unless nonnegative and summing to 1 within 1e-12.
    void validate() const;
};

enum class PotentialModel {
    Isotropic,    // g_d m_d mu_B b |r|, the mean-gradient convention of the closed form
    Anisotropic,  // g_d m_d mu_B b sqrt(x^2 + y^2 + 4 z^2)
};

struct EnergyAudit {
    double kinetic = 0.0;    // J
    double potential = 0.0;  // J
};

constexpr bool is_trapped(int zeeman_m) { return zeeman_m > 0; }

// Position ~ N(0, sigma^2) per axis; velocity Maxwell-Boltzmann at the MOT temperature.
Particle sample_mot_atom(const MotCloud& mot, const SpeciesData& species, std::mt19937_64& rng);

int sample_zeeman_substate(const PumpingDistribution& dist, std::mt19937_64& rng);

EnergyAudit transfer_energy_audit(const Particle& p, const QuadrupoleField& field, const SpeciesData& species,
                                  PotentialModel model = PotentialModel::Isotropic);

// T = 2 <E_kin + V> / (9 k_B) over the trapped ensemble.
double equilibrium_temperature(std::span<const Particle> ensemble, const QuadrupoleField& field,
                               const SpeciesData& species, PotentialModel model = PotentialModel::Isotropic);

struct TransferConfig {
    MotCloud mot;
    QuadrupoleField field;
    PumpingDistribution pumping = PumpingDistribution::point(4);
    long particles = 100000;
    std::uint64_t seed = 1;
    std::string stream = "mc.transfer";
    PotentialModel potential = PotentialModel::Isotropic;
    int threads = 1;  // result does not depend on this
};

struct TransferSummary {
    long sampled = 0;
    long trapped = 0;
    double mean_kinetic = 0.0;    // J
    double mean_potential = 0.0;  // J
    double temperature = 0.0;     // K, virial prediction
    double temperature_stderr = 0.0;
    double mean_radius = 0.0;     // m, <|r|> of trapped atoms
    double mean_radius_stderr = 0.0;
    double mean_speed_sq = 0.0;   // m^2/s^2
    double mean_m_d = 0.0;
};

// Streams the ensemble in fixed-size chunks, each with its own generator
// (seed, stream, chunk index); chunk sums are reduced in index order, so the
// result is bit-identical for any thread count.
TransferSummary run_transfer_ensemble(const TransferConfig& config, const SpeciesData& species);

inline constexpr long kTransferChunk = 8192;

}  // namespace mtload
