#include "hybridsim/convergence.hpp"

#include "hybridsim/errors.hpp"
#include "hybridsim/parallel.hpp"
#include "hybridsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hybridsim {

std::optional<double> decoupling_time(const HybridPath& a, const HybridPath& b) {
    if (a.horizon != b.horizon)
        throw std::domain_error("decoupling_time: paths must share a common horizon");
    if (a.origin.mode != b.origin.mode) return 0.0;
    std::size_t i = 0, k = 0;
    const auto& ea = a.discrete_events;
    const auto& eb = b.discrete_events;
    while (i < ea.size() || k < eb.size()) {
        const double ta = i < ea.size() ? ea[i].time : std::numeric_limits<double>::infinity();
        const double tb = k < eb.size() ? eb[k].time : std::numeric_limits<double>::infinity();
        if (ta < tb) return ta;
        if (tb < ta) return tb;
        if (ea[i].post_mode != eb[k].post_mode) return ta;
        ++i;
        ++k;
    }
    return std::nullopt;
}

std::optional<std::uint64_t> disagreement_index(const std::vector<AuditRecord>& a,
                                                const std::vector<AuditRecord>& b) {
    if (a.size() != b.size())
        throw std::domain_error("disagreement_index: audits have different atom counts");
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (a[m].time != b[m].time || a[m].u != b[m].u)
            throw std::domain_error("disagreement_index: audits come from different tapes");
        const int da = a[m].mode_after - a[m].mode_before;
        const int db = b[m].mode_after - b[m].mode_before;
        if (da != db) return a[m].atom_index;
    }
    return std::nullopt;
}

RateFit fit_rate(const std::vector<std::uint64_t>& levels, const std::vector<double>& errors) {
    if (levels.size() != errors.size())
        throw std::invalid_argument("fit_rate: levels and errors must have equal length");
    RateFit fit;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
            std::ostringstream w;
            w << "fit_rate: level " << levels[i] << " excluded (nonpositive error "
              << errors[i] << ")";
            fit.warnings.push_back(w.str());
            continue;
        }
        xs.push_back(std::log2(static_cast<double>(levels[i])));
        ys.push_back(std::log2(errors[i]));
    }
    if (xs.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 levels with positive error");
    const auto n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.intercept + fit.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    fit.residual = ss_res;
    if (ss_tot < 1e-30)
        fit.r_squared = ss_res < 1e-30 ? 1.0 : 0.0;
    else
        fit.r_squared = 1.0 - ss_res / ss_tot;
    return fit;
}

namespace {

double sorted_quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    // Linear interpolation between order statistics.
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double median(std::vector<double> v) { return sorted_quantile(std::move(v), 0.5); }

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxx == 0.0 ? 0.0 : sxy / sxx;
}

} // namespace

ConvergenceReport run_convergence_study(const ModelSpec& model, double T,
                                        const std::vector<std::uint64_t>& levels,
                                        std::uint64_t n_fine, std::size_t paths,
                                        std::uint64_t seed, unsigned jobs) {
    if (levels.empty()) throw ConfigError("convergence study: no levels given");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i > 0 && levels[i] <= levels[i - 1])
            throw ConfigError("convergence study: levels must be strictly increasing");
        if (levels[i] < 1 || n_fine % levels[i] != 0)
            throw ConfigError("convergence study: every level must divide n_fine");
    }
    if (paths == 0) throw ConfigError("convergence study: need at least one path");
    model.validate();

    ConvergenceReport report;
    report.horizon = T;
    report.n_fine = n_fine;
    report.seed = seed;
    report.paths_per_level = paths;
    report.levels = levels;
    report.outcomes.assign(levels.size(), std::vector<PairOutcome>(paths));

    const int brownian_dim = tape_brownian_dim(model);

    parallel_for_indexed(paths, jobs, [&](std::size_t path_idx) {
        const NoiseTape tape = generate_tape(seed, T, n_fine, model.lambda(), model.cp_streams,
                                             brownian_dim, path_idx);
        const SimulationResult fine = simulate(model, T, n_fine, tape);
        for (std::size_t li = 0; li < levels.size(); ++li) {
            SimulationResult coarse = simulate(model, T, levels[li], tape);
            PairOutcome& out = report.outcomes[li][path_idx];
            out.kappa = disagreement_index(fine.audit, coarse.audit);
            if (out.kappa) out.kappa_time = fine.audit[*out.kappa - 1].time;
            CoupledRun run = couple_results(fine, std::move(coarse), T);
            out.decoupling = run.decoupling;
            out.sup_error = run.sup_error;
        }
    });

    std::vector<std::uint64_t> fit_levels;
    std::vector<double> fit_errors;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        LevelStats st;
        st.level = levels[li];
        st.paths = paths;
        std::vector<double> coupled_errors;
        for (const PairOutcome& out : report.outcomes[li]) {
            if (out.decoupling)
                ++st.decoupled;
            else
                coupled_errors.push_back(out.sup_error);
        }
        st.decouple_frequency = static_cast<double>(st.decoupled) / static_cast<double>(paths);
        st.median_error = median(coupled_errors);
        st.q90_error = sorted_quantile(coupled_errors, 0.9);
        if (!coupled_errors.empty()) {
            fit_levels.push_back(st.level);
            fit_errors.push_back(st.median_error);
        } else {
            report.warnings.push_back("level " + std::to_string(st.level) +
                                      ": every pair decoupled; excluded from the rate fit");
        }
        report.stats.push_back(st);
    }

    try {
        RateFit fit = fit_rate(fit_levels, fit_errors);
        report.has_fit = true;
        report.slope = fit.slope;
        report.intercept = fit.intercept;
        report.r_squared = fit.r_squared;
        report.fit_residual = fit.residual;
        for (auto& w : fit.warnings) report.warnings.push_back(std::move(w));
    } catch (const std::invalid_argument& e) {
        report.warnings.push_back(std::string("rate fit refused: ") + e.what());
    }

    report.median_strictly_decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const LevelStats& st : report.stats) {
        if (std::isnan(st.median_error) || !(st.median_error < prev)) {
            report.median_strictly_decreasing = false;
            break;
        }
        prev = st.median_error;
    }

    // Bootstrap trend test on the decoupling frequencies: resample paths
    // within each level and refit the frequency-vs-log2(level) slope.
    {
        std::vector<double> xs;
        xs.reserve(levels.size());
        for (auto lv : levels) xs.push_back(std::log2(static_cast<double>(lv)));
        constexpr std::size_t kResamples = 1000;
        CounterRng rng(derive_stream_key(seed, 0x300, 0));
        std::vector<double> slopes(kResamples);
        std::vector<double> freqs(levels.size());
        for (std::size_t b = 0; b < kResamples; ++b) {
            for (std::size_t li = 0; li < levels.size(); ++li) {
                std::size_t decoupled = 0;
                for (std::size_t k = 0; k < paths; ++k) {
                    const auto pick = static_cast<std::size_t>(
                        rng.next_uniform(0.0, static_cast<double>(paths)));
                    if (report.outcomes[li][std::min(pick, paths - 1)].decoupling) ++decoupled;
                }
                freqs[li] = static_cast<double>(decoupled) / static_cast<double>(paths);
            }
            slopes[b] = ols_slope(xs, freqs);
        }
        std::sort(slopes.begin(), slopes.end());
        const double q95 = slopes[static_cast<std::size_t>(0.95 * (kResamples - 1))];
        report.decoupling_non_increasing_95 = q95 <= 1e-9;
    }

    return report;
}

} // namespace hybridsim
