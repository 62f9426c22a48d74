#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "glycast/eval.hpp"

namespace glycast {

namespace {

using CellKey = std::tuple<std::string, std::int64_t, int, int>;

std::string fmt(double v, int prec = 3) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

} // namespace

Report report(const std::vector<EvalRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("report: no rows");

    struct Agg {
        std::vector<double> rmse;
        std::vector<double> mae;
    };
    std::map<CellKey, Agg> by_cell;
    std::size_t n_errors = 0;
    for (const auto& r : rows) {
        if (!r.ok()) {
            ++n_errors;
            continue;
        }
        Agg& agg = by_cell[{r.model, r.step_s, r.history_h, r.horizon_min}];
        agg.rmse.push_back(r.rmse);
        agg.mae.push_back(r.mae);
    }

    Report rep;
    rep.n_error_rows = n_errors;
    for (const auto& [key, agg] : by_cell) {
        ReportCell cell;
        std::tie(cell.model, cell.step_s, cell.history_h, cell.horizon_min) = key;
        cell.n_patients = agg.rmse.size();
        double sum = 0.0;
        for (double v : agg.rmse) sum += v;
        cell.mean_rmse = sum / static_cast<double>(agg.rmse.size());
        double ss = 0.0;
        for (double v : agg.rmse) ss += (v - cell.mean_rmse) * (v - cell.mean_rmse);
        cell.sd_rmse = agg.rmse.size() > 1
                           ? std::sqrt(ss / static_cast<double>(agg.rmse.size() - 1))
                           : 0.0;
        double msum = 0.0;
        for (double v : agg.mae) msum += v;
        cell.mean_mae = msum / static_cast<double>(agg.mae.size());
        rep.cells.push_back(std::move(cell));
    }
    if (rep.cells.empty()) throw std::invalid_argument("report: only error rows");

    // Persistence-baseline diagnostic per (step, history, horizon).
    std::map<std::tuple<std::int64_t, int, int>, double> persistence_rmse;
    for (const auto& c : rep.cells) {
        if (c.model == "persistence") {
            persistence_rmse[{c.step_s, c.history_h, c.horizon_min}] = c.mean_rmse;
        }
    }
    for (auto& c : rep.cells) {
        const auto it =
            persistence_rmse.find({c.step_s, c.history_h, c.horizon_min});
        c.beats_persistence = it == persistence_rmse.end()
                                  ? true
                                  : c.mean_rmse <= it->second;
    }

    rep.best_cell = 0;
    for (std::size_t i = 1; i < rep.cells.size(); ++i) {
        if (rep.cells[i].mean_rmse < rep.cells[rep.best_cell].mean_rmse) {
            rep.best_cell = i;
        }
    }
    return rep;
}

std::string Report::summary_csv() const {
    std::ostringstream out;
    out << "model,step_s,history_h,horizon_min,n_patients,mean_rmse,sd_rmse,"
           "mean_mae,beats_persistence,best\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        out << c.model << ',' << c.step_s << ',' << c.history_h << ','
            << c.horizon_min << ',' << c.n_patients << ',' << fmt(c.mean_rmse)
            << ',' << fmt(c.sd_rmse) << ',' << fmt(c.mean_mae) << ','
            << (c.beats_persistence ? 1 : 0) << ',' << (i == best_cell ? 1 : 0)
            << '\n';
    }
    return out.str();
}

std::string Report::long_csv() const {
    std::ostringstream out;
    out << "model,step_s,history_h,horizon_min,metric,value\n";
    for (const auto& c : cells) {
        const auto prefix = [&](std::ostringstream& o) -> std::ostringstream& {
            o << c.model << ',' << c.step_s << ',' << c.history_h << ','
              << c.horizon_min << ',';
            return o;
        };
        prefix(out) << "mean_rmse," << fmt(c.mean_rmse) << '\n';
        prefix(out) << "sd_rmse," << fmt(c.sd_rmse) << '\n';
        prefix(out) << "mean_mae," << fmt(c.mean_mae) << '\n';
    }
    return out.str();
}

std::string Report::text_table() const {
    std::ostringstream out;
    out << "model         step_s  hist_h  horiz_min  n   mean_rmse  sd_rmse  mean_mae  flags\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        char line[200];
        std::snprintf(line, sizeof(line),
                      "%-13s %6lld  %6d  %9d  %-3zu %9.3f  %7.3f  %8.3f  %s%s\n",
                      c.model.c_str(), static_cast<long long>(c.step_s),
                      c.history_h, c.horizon_min, c.n_patients, c.mean_rmse,
                      c.sd_rmse, c.mean_mae, i == best_cell ? "best " : "",
                      c.beats_persistence ? "" : "worse-than-persistence");
        out << line;
    }
    if (n_error_rows > 0) {
        out << "(" << n_error_rows << " error rows excluded)\n";
    }
    return out.str();
}

} // namespace glycast
