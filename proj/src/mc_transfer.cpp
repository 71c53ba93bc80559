#include "mtload/mc_transfer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <vector>

#include "mtload/errors.hpp"
#include "mtload/random.hpp"

namespace mtload {

using PC = PhysConstants;

PumpingDistribution PumpingDistribution::point(int m) {
    if (m < -kMaxM || m > kMaxM) throw InvalidInput("Zeeman substate out of range");
    PumpingDistribution d;
    d.probabilities[static_cast<std::size_t>(m + kMaxM)] = 1.0;
    return d;
}

PumpingDistribution PumpingDistribution::uniform() {
    PumpingDistribution d;
    d.probabilities.fill(1.0 / static_cast<double>(d.probabilities.size()));
    return d;
}

void PumpingDistribution::validate() const {
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0)) throw InvalidInput("pumping probabilities must be nonnegative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("pumping probabilities must sum to 1");
}

Particle sample_mot_atom(const MotCloud& mot, const SpeciesData& species, std::mt19937_64& rng) {
    if (mot.size_sigma < 0.0 || mot.temperature < 0.0) throw InvalidInput("MOT size and temperature must be >= 0");
    std::normal_distribution<double> unit(0.0, 1.0);
    const double vs = std::sqrt(PC::k_B * mot.temperature / species.mass);
    Particle p;
    p.position = {mot.size_sigma * unit(rng), mot.size_sigma * unit(rng), mot.size_sigma * unit(rng)};
    p.velocity = {vs * unit(rng), vs * unit(rng), vs * unit(rng)};
    return p;
}

int sample_zeeman_substate(const PumpingDistribution& dist, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double x = u(rng);
    double acc = 0.0;
    int last_nonzero = -PumpingDistribution::kMaxM;
    for (int m = -PumpingDistribution::kMaxM; m <= PumpingDistribution::kMaxM; ++m) {
        const double p = dist.probability(m);
        if (p <= 0.0) continue;
        acc += p;
        last_nonzero = m;
        if (x < acc) return m;
    }
    return last_nonzero;  // rounding slack in the cumulative sum
}

EnergyAudit transfer_energy_audit(const Particle& p, const QuadrupoleField& field, const SpeciesData& species,
                                  PotentialModel model) {
    if (!is_trapped(p.zeeman_m)) throw InvalidInput("only low-field seeking substates (m_d > 0) are trapped");
    const auto& r = p.position;
    const auto& v = p.velocity;
    const double dist = model == PotentialModel::Isotropic ? std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z)
                                                           : std::sqrt(r.x * r.x + r.y * r.y + 4.0 * r.z * r.z);
    EnergyAudit e;
    e.kinetic = 0.5 * species.mass * (v.x * v.x + v.y * v.y + v.z * v.z);
    e.potential = species.lande_g_d * p.zeeman_m * PC::mu_B * field.gradient * dist;
    return e;
}

double equilibrium_temperature(std::span<const Particle> ensemble, const QuadrupoleField& field,
                               const SpeciesData& species, PotentialModel model) {
    if (ensemble.empty()) throw InvalidInput("empty ensemble");
    double total = 0.0;
    for (const auto& p : ensemble) {
        const auto e = transfer_energy_audit(p, field, species, model);
        total += e.kinetic + e.potential;
    }
    return 2.0 * (total / static_cast<double>(ensemble.size())) / (9.0 * PC::k_B);
}

namespace {

struct ChunkSums {
    long sampled = 0;
    long trapped = 0;
    double kinetic = 0.0;
    double potential = 0.0;
    double energy_sq = 0.0;
    double radius = 0.0;
    double radius_sq = 0.0;
    double speed_sq = 0.0;
    double m_d = 0.0;
};

ChunkSums run_chunk(const TransferConfig& cfg, const SpeciesData& species, long chunk, long count) {
    auto rng = make_stream(cfg.seed, cfg.stream, static_cast<std::uint64_t>(chunk));
    ChunkSums s;
    for (long i = 0; i < count; ++i) {
        Particle p = sample_mot_atom(cfg.mot, species, rng);
        p.zeeman_m = sample_zeeman_substate(cfg.pumping, rng);
        ++s.sampled;
        if (!is_trapped(p.zeeman_m)) continue;
        const auto e = transfer_energy_audit(p, cfg.field, species, cfg.potential);
        const auto& r = p.position;
        const auto& v = p.velocity;
        const double radius = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
        const double total = e.kinetic + e.potential;
        ++s.trapped;
        s.kinetic += e.kinetic;
        s.potential += e.potential;
        s.energy_sq += total * total;
        s.radius += radius;
        s.radius_sq += radius * radius;
        s.speed_sq += v.x * v.x + v.y * v.y + v.z * v.z;
        s.m_d += p.zeeman_m;
    }
    return s;
}

}  // namespace

TransferSummary run_transfer_ensemble(const TransferConfig& cfg, const SpeciesData& species) {
    if (cfg.particles <= 0) throw InvalidInput("particle count must be positive");
    cfg.pumping.validate();
    const long chunks = (cfg.particles + kTransferChunk - 1) / kTransferChunk;
    std::vector<ChunkSums> sums(static_cast<std::size_t>(chunks));
    auto count_of = [&](long c) { return std::min(kTransferChunk, cfg.particles - c * kTransferChunk); };

    const int threads = std::clamp(cfg.threads, 1, static_cast<int>(std::max<long>(1, chunks)));
    if (threads == 1) {
        for (long c = 0; c < chunks; ++c) sums[static_cast<std::size_t>(c)] = run_chunk(cfg, species, c, count_of(c));
    } else {
        std::atomic<long> next{0};
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (long c = next++; c < chunks; c = next++) {
                    sums[static_cast<std::size_t>(c)] = run_chunk(cfg, species, c, count_of(c));
                }
            });
        }
    }

    ChunkSums all;
    for (const auto& s : sums) {
        all.sampled += s.sampled;
        all.trapped += s.trapped;
        all.kinetic += s.kinetic;
        all.potential += s.potential;
        all.energy_sq += s.energy_sq;
        all.radius += s.radius;
        all.radius_sq += s.radius_sq;
        all.speed_sq += s.speed_sq;
        all.m_d += s.m_d;
    }
    if (all.trapped == 0) throw InvalidInput("no atom ended in a trapped substate");

    const double n = static_cast<double>(all.trapped);
    TransferSummary out;
    out.sampled = all.sampled;
    out.trapped = all.trapped;
    out.mean_kinetic = all.kinetic / n;
    out.mean_potential = all.potential / n;
    const double mean_e = out.mean_kinetic + out.mean_potential;
    const double var_e = std::max(0.0, all.energy_sq / n - mean_e * mean_e) * n / std::max(1.0, n - 1.0);
    out.temperature = 2.0 * mean_e / (9.0 * PC::k_B);
    out.temperature_stderr = 2.0 * std::sqrt(var_e / n) / (9.0 * PC::k_B);
    out.mean_radius = all.radius / n;
    const double var_r = std::max(0.0, all.radius_sq / n - out.mean_radius * out.mean_radius) * n / std::max(1.0, n - 1.0);
    out.mean_radius_stderr = std::sqrt(var_r / n);
    out.mean_speed_sq = all.speed_sq / n;
    out.mean_m_d = all.m_d / n;
    return out;
}

}  // namespace mtload
