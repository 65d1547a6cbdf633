#include "foehn/reconstruct.hpp"

#include "foehn/data_io.hpp"
#include "foehn/errors.hpp"
#include "foehn/parallel.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <set>

namespace foehn {

HourlySeries reconstruct(const HourlyModels& models, const FeatureTable& features, Instant first, Instant last,
                         int threads) {
    if (models.size() != 24) throw ContractError("reconstruct: expected 24 hour-of-day model slots");
    std::string missing;
    for (std::size_t h = 0; h < 24; ++h)
        if (!models[h]) missing += (missing.empty() ? "" : ", ") + std::to_string(h);
    if (!missing.empty()) throw ConfigError("reconstruct: no model for hours " + missing);
    if (!is_aligned(first, kHour) || !is_aligned(last, kHour) || last < first)
        throw RangeError("reconstruct: span must be hour-aligned and ordered");

    const auto n = static_cast<std::size_t>(hour_count(first, last));
    const auto r0 = features.row_of(first);
    const auto r1 = features.row_of(last);
    if (r0 < 0 || r1 < 0)
        throw RangeError("features cover " + (features.rows ? format_iso(features.start) + " .. " +
                                                                  format_iso(features.time(features.rows - 1))
                                                            : std::string("nothing")) +
                         ", requested " + format_iso(first) + " .. " + format_iso(last));

    // Column positions per model; schema problems surface before any prediction.
    for (std::size_t h = 0; h < 24; ++h) {
        std::string absent;
        for (const auto& name : model_names(*models[h]))
            if (features.column(name) < 0) absent += (absent.empty() ? "" : ", ") + name;
        if (!absent.empty())
            throw SchemaError("model for hour " + std::to_string(h) + " needs columns missing from features: " + absent);
    }

    HourlySeries out;
    out.start = first;
    out.p.assign(n, kMissing);
    // Rows by hour of day so each model predicts one block.
    std::vector<std::vector<std::size_t>> by_hour(24);
    for (std::size_t i = 0; i < n; ++i) by_hour[std::size_t(to_civil(out.time(i)).hour)].push_back(i);

    parallel_for(24, threads, [&](std::size_t h) {
        const auto& model = *models[h];
        const auto& names = model_names(model);
        const auto& idx = by_hour[h];
        constexpr std::size_t block = 8192;
        for (std::size_t b = 0; b < idx.size(); b += block) {
            std::size_t e = std::min(idx.size(), b + block);
            Eigen::MatrixXd X(Eigen::Index(e - b), Eigen::Index(names.size()));
            for (std::size_t j = 0; j < names.size(); ++j) {
                const auto& col = features.columns[std::size_t(features.column(names[j]))];
                for (std::size_t i = b; i < e; ++i)
                    X(Eigen::Index(i - b), Eigen::Index(j)) = col[std::size_t(r0) + idx[i]];
            }
            auto p = predict(model, X, names);
            for (std::size_t i = b; i < e; ++i) out.p[idx[i]] = p[Eigen::Index(i - b)];
        }
    });
    return out;
}

AggregateSeries trim_partial(const AggregateSeries& s, double min_availability) {
    std::size_t a = 0, b = s.size();
    while (a < b && s.availability[a] < min_availability) ++a;
    while (b > a && s.availability[b - 1] < min_availability) --b;
    AggregateSeries out;
    out.period = s.period;
    out.period_start.assign(s.period_start.begin() + std::ptrdiff_t(a), s.period_start.begin() + std::ptrdiff_t(b));
    out.value.assign(s.value.begin() + std::ptrdiff_t(a), s.value.begin() + std::ptrdiff_t(b));
    out.availability.assign(s.availability.begin() + std::ptrdiff_t(a), s.availability.begin() + std::ptrdiff_t(b));
    return out;
}

std::vector<ReconstructionYear> reconstruction_report(const HourlySeries& recon, const HourlyLabelSeries* observed) {
    std::map<int, ReconstructionYear> years;
    auto row = [&](int y) -> ReconstructionYear& {
        auto [it, fresh] = years.try_emplace(y);
        if (fresh) {
            it->second.year = y;
            it->second.recon_mean = it->second.obs_mean = it->second.obs_availability = it->second.obs_foehn_hours =
                kMissing;
        }
        return it->second;
    };
    std::set<int> recon_years;
    if (recon.size()) {
        auto annual = trim_partial(periodic_mean(daily_max(recon), PeriodUnit::year, 0.0), 0.5);
        for (std::size_t i = 0; i < annual.size(); ++i) {
            int y = to_civil(annual.period_start[i]).year;
            row(y).recon_mean = annual.value[i];
            recon_years.insert(y);
        }
    }
    if (observed && observed->size()) {
        auto annual = periodic_mean(daily_max(as_probabilities(*observed)), PeriodUnit::year, kObservedMinAvailability);
        std::map<int, double> hours;
        for (std::size_t i = 0; i < observed->size(); ++i)
            if (observed->label[i] == HourLabel::foehn) hours[to_civil(observed->time(i) - kHour).year] += 1.0;
        for (std::size_t i = 0; i < annual.size(); ++i) {
            int y = to_civil(annual.period_start[i]).year;
            if (annual.availability[i] <= 0.0 && !recon_years.count(y)) continue;
            auto& r = row(y);
            r.obs_mean = annual.value[i];
            r.obs_availability = annual.availability[i];
            r.obs_foehn_hours = hours.count(y) ? hours[y] : 0.0;
        }
    }
    std::vector<ReconstructionYear> out;
    for (auto& [y, r] : years) out.push_back(r);
    return out;
}

void write_reconstruction_report_csv(std::ostream& out, const std::vector<ReconstructionYear>& rows) {
    out << "year,recon_annual_mean,obs_annual_mean,obs_availability,obs_foehn_hours\n";
    for (const auto& r : rows)
        out << r.year << ',' << format_number(r.recon_mean) << ',' << format_number(r.obs_mean) << ','
            << format_number(r.obs_availability) << ',' << format_number(r.obs_foehn_hours) << '\n';
}

} // namespace foehn
