#include "hybridsim/noise_tape.hpp"

#include "hybridsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hybridsim {

void CompoundPoissonSpec::validate() const {
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw ConfigError("compound poisson: rate must be finite and nonnegative");
    if (!(p_up >= 0.0 && p_up <= 1.0))
        throw ConfigError("compound poisson: p_up must lie in [0, 1]");
    if (!(eta_up > 0.0) || !(eta_down > 0.0))
        throw ConfigError("compound poisson: jump magnitude means must be positive");
}

double sample_double_exponential(CounterRng& rng, double p_up, double eta_up, double eta_down) {
    if (!(p_up >= 0.0 && p_up <= 1.0) || !(eta_up > 0.0) || !(eta_down > 0.0))
        throw ConfigError("double exponential: invalid parameters");
    const double u = rng.next_unit_open();
    if (u < p_up) return rng.next_exponential_mean(eta_up);
    return -rng.next_exponential_mean(eta_down);
}

std::size_t NoiseTape::index_at(double t) const {
    const double x = t * static_cast<double>(n_ref) + 1e-9;
    if (x < 0.0) return 0;
    const auto idx = static_cast<std::size_t>(x);
    return std::min(idx, fine_count_);
}

NoiseTape generate_tape(std::uint64_t seed, double horizon, std::uint64_t n_ref, double lambda,
                        std::span<const CompoundPoissonSpec> cp_specs, int brownian_dim,
                        std::uint64_t path_index) {
    if (n_ref < 1) throw ConfigError("generate_tape: n_ref must be >= 1");
    if (!(lambda > 0.0)) throw ConfigError("generate_tape: lambda must be positive");
    if (!(horizon > 0.0)) throw ConfigError("generate_tape: horizon must be positive");
    if (brownian_dim < 0) throw ConfigError("generate_tape: negative Brownian dimension");

    NoiseTape tape;
    tape.seed = seed;
    tape.path_index = path_index;
    tape.horizon = horizon;
    tape.n_ref = n_ref;
    tape.lambda = lambda;
    tape.brownian_dim = brownian_dim;
    tape.cp_specs.assign(cp_specs.begin(), cp_specs.end());

    const double cells = horizon * static_cast<double>(n_ref);
    tape.fine_count_ = static_cast<std::size_t>(std::ceil(cells - 1e-9));
    const std::size_t doubles = (tape.fine_count_ + 1) * static_cast<std::size_t>(brownian_dim);
    if (doubles > kMaxTapeDoubles)
        throw ResourceError("generate_tape: horizon * n_ref * dim exceeds the tape memory budget ("
                            + std::to_string(doubles) + " > " + std::to_string(kMaxTapeDoubles) +
                            " doubles); lower n_ref or split the run");

    const double h = tape.fine_step();
    const double sqrt_h = std::sqrt(h);
    tape.brownian.resize(static_cast<std::size_t>(brownian_dim));
    for (int d = 0; d < brownian_dim; ++d) {
        CounterRng rng(derive_stream_key(seed, kStreamBrownianBase + static_cast<std::uint64_t>(d),
                                         path_index));
        auto& w = tape.brownian[static_cast<std::size_t>(d)];
        w.resize(tape.fine_count_ + 1);
        w[0] = 0.0;
        for (std::size_t k = 0; k < tape.fine_count_; ++k)
            w[k + 1] = w[k] + sqrt_h * rng.next_normal();
    }

    {
        CounterRng rng(derive_stream_key(seed, kStreamMaster, path_index));
        double t = 0.0;
        for (;;) {
            t += rng.next_exponential_mean(1.0 / lambda);
            if (t > horizon) break;
            tape.master_atoms.push_back({t, rng.next_uniform(0.0, lambda)});
        }
    }

    tape.cp_events.resize(tape.cp_specs.size());
    for (std::size_t s = 0; s < tape.cp_specs.size(); ++s) {
        const CompoundPoissonSpec& spec = tape.cp_specs[s];
        spec.validate();
        if (spec.rate == 0.0) continue;
        CounterRng rng(derive_stream_key(seed, kStreamCompoundPoissonBase + s, path_index));
        double t = 0.0;
        for (;;) {
            t += rng.next_exponential_mean(1.0 / spec.rate);
            if (t > horizon) break;
            tape.cp_events[s].push_back(
                {t, sample_double_exponential(rng, spec.p_up, spec.eta_up, spec.eta_down)});
        }
    }
    return tape;
}

std::vector<double> CoarseIncrements::increments(int dim) const {
    const auto& w = prefix[static_cast<std::size_t>(dim)];
    std::vector<double> out(w.size() - 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) out[i] = w[i + 1] - w[i];
    return out;
}

namespace {

CoarseIncrements subsample(const std::vector<std::vector<double>>& prefix, std::uint64_t n_ref,
                           std::uint64_t base_factor, std::uint64_t factor) {
    CoarseIncrements out;
    out.n_ref = n_ref;
    out.factor = base_factor * factor;
    if (n_ref % out.factor != 0)
        throw std::domain_error("coarsen_brownian: factor does not divide the fine grid evenly "
                                "per unit interval");
    out.prefix.resize(prefix.size());
    for (std::size_t d = 0; d < prefix.size(); ++d) {
        const auto& w = prefix[d];
        const std::size_t blocks = (w.size() - 1) / factor;
        auto& sub = out.prefix[d];
        sub.resize(blocks + 1);
        for (std::size_t i = 0; i <= blocks; ++i) sub[i] = w[i * factor];
    }
    return out;
}

} // namespace

CoarseIncrements coarsen_brownian(const NoiseTape& tape, std::uint64_t factor) {
    if (factor < 1) throw std::domain_error("coarsen_brownian: factor must be >= 1");
    return subsample(tape.brownian, tape.n_ref, 1, factor);
}

CoarseIncrements coarsen_brownian(const CoarseIncrements& coarse, std::uint64_t factor) {
    if (factor < 1) throw std::domain_error("coarsen_brownian: factor must be >= 1");
    return subsample(coarse.prefix, coarse.n_ref, coarse.factor, factor);
}

// ---------------------------------------------------------------------------
// Binary replay format. All fields little-endian; doubles are IEEE binary64.

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'T', 'A', 'P', 'E', '0', '1'};
constexpr std::uint32_t kEndianCheck = 0x01020304u;
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

} // namespace

void save_tape(const NoiseTape& tape, const std::string& file) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("save_tape: cannot open " + file);
    os.write(kMagic, sizeof(kMagic));
    put(os, kEndianCheck);
    put(os, kVersion);
    put(os, tape.seed);
    put(os, tape.path_index);
    put(os, tape.horizon);
    put(os, static_cast<std::uint64_t>(tape.n_ref));
    put(os, tape.lambda);
    put(os, static_cast<std::uint64_t>(tape.brownian_dim));
    put(os, static_cast<std::uint64_t>(tape.fine_count_));
    for (const auto& w : tape.brownian)
        os.write(reinterpret_cast<const char*>(w.data()),
                 static_cast<std::streamsize>(w.size() * sizeof(double)));
    put(os, static_cast<std::uint64_t>(tape.master_atoms.size()));
    for (const auto& a : tape.master_atoms) {
        put(os, a.time);
        put(os, a.mark);
    }
    put(os, static_cast<std::uint64_t>(tape.cp_specs.size()));
    for (std::size_t s = 0; s < tape.cp_specs.size(); ++s) {
        const auto& spec = tape.cp_specs[s];
        put(os, spec.rate);
        put(os, spec.p_up);
        put(os, spec.eta_up);
        put(os, spec.eta_down);
        put(os, static_cast<std::uint64_t>(tape.cp_events[s].size()));
        for (const auto& e : tape.cp_events[s]) {
            put(os, e.time);
            put(os, e.value);
        }
    }
    if (!os) throw IoError("save_tape: write failure on " + file);
}

NoiseTape load_tape(const std::string& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw IoError("load_tape: cannot open " + file);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("load_tape: bad magic in " + file);
    if (get<std::uint32_t>(is) != kEndianCheck)
        throw IoError("load_tape: endianness mismatch in " + file);
    if (get<std::uint32_t>(is) != kVersion)
        throw IoError("load_tape: unsupported version in " + file);
    NoiseTape tape;
    tape.seed = get<std::uint64_t>(is);
    tape.path_index = get<std::uint64_t>(is);
    tape.horizon = get<double>(is);
    tape.n_ref = get<std::uint64_t>(is);
    tape.lambda = get<double>(is);
    tape.brownian_dim = static_cast<int>(get<std::uint64_t>(is));
    tape.fine_count_ = static_cast<std::size_t>(get<std::uint64_t>(is));
    tape.brownian.resize(static_cast<std::size_t>(tape.brownian_dim));
    for (auto& w : tape.brownian) {
        w.resize(tape.fine_count_ + 1);
        is.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(w.size() * sizeof(double)));
    }
    const auto atom_count = get<std::uint64_t>(is);
    tape.master_atoms.resize(atom_count);
    for (auto& a : tape.master_atoms) {
        a.time = get<double>(is);
        a.mark = get<double>(is);
    }
    const auto streams = get<std::uint64_t>(is);
    tape.cp_specs.resize(streams);
    tape.cp_events.resize(streams);
    for (std::uint64_t s = 0; s < streams; ++s) {
        auto& spec = tape.cp_specs[s];
        spec.rate = get<double>(is);
        spec.p_up = get<double>(is);
        spec.eta_up = get<double>(is);
        spec.eta_down = get<double>(is);
        const auto events = get<std::uint64_t>(is);
        tape.cp_events[s].resize(events);
        for (auto& e : tape.cp_events[s]) {
            e.time = get<double>(is);
            e.value = get<double>(is);
        }
    }
    if (!is) throw IoError("load_tape: truncated file " + file);
    return tape;
}

} // namespace hybridsim
