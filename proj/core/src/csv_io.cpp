#include "glycast/csv_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "glycast/errors.hpp"

namespace glycast {

namespace {

constexpr const char* kHeader = "patient_id,timestamp,variable,value,unit";
constexpr std::size_t kMaxSlots = 10'000'000;

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

void write_row(std::ostream& out, const std::string& pid, Timestamp t,
               VariableId var, double value) {
    out << pid << ',' << format_rfc3339(t) << ',' << to_string(var) << ','
        << format_value(value) << ',' << canonical_unit(var) << '\n';
}

double parse_value(const std::string& field, const std::string& file, int line) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw ParseError(file, line, "bad value '" + field + "'");
    }
    if (pos != field.size()) {
        throw ParseError(file, line, "trailing junk in value '" + field + "'");
    }
    return v;
}

} // namespace

void write_patient_csv(const PatientRecord& record, std::ostream& out) {
    out << kHeader << '\n';
    for (const auto& [var, data] : record.series) {
        if (const auto* ev = std::get_if<EventSeries>(&data)) {
            for (const Event& e : ev->events) {
                write_row(out, record.patient_id, e.time, var, e.value);
            }
        } else {
            const auto& u = std::get<UniformSeries>(data);
            for (std::size_t i = 0; i < u.values.size(); ++i) {
                if (!is_gap(u.values[i])) {
                    write_row(out, record.patient_id, u.time_at(i), var, u.values[i]);
                }
            }
        }
    }
}

void write_patient_csv(const PatientRecord& record, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_patient_csv(record, f);
    if (!f.good()) throw std::runtime_error("write failed: " + path);
}

PatientRecord read_patient_csv(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(name, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) {
        throw ParseError(name, 1, "bad header, expected '" + std::string(kHeader) + "'");
    }

    struct Sample {
        Timestamp t;
        double v;
    };
    std::map<VariableId, std::vector<Sample>> samples;
    PatientRecord record;
    bool have_pid = false;

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (fields.size() != 5) {
            throw ParseError(name, lineno, "expected 5 fields, got " +
                                               std::to_string(fields.size()));
        }

        if (!have_pid) {
            record.patient_id = fields[0];
            have_pid = true;
        } else if (fields[0] != record.patient_id) {
            throw ParseError(name, lineno, "mixed patient ids ('" + fields[0] +
                                               "' vs '" + record.patient_id + "')");
        }

        Timestamp t;
        try {
            t = parse_rfc3339(fields[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(name, lineno, e.what());
        }

        const auto var = parse_variable(fields[2]);
        if (!var) {
            throw ParseError(name, lineno, "unknown variable '" + fields[2] + "'");
        }
        if (fields[4] != canonical_unit(*var)) {
            throw ParseError(name, lineno,
                             "unit mismatch for " + fields[2] + ": got '" + fields[4] +
                                 "', expected '" + std::string(canonical_unit(*var)) + "'");
        }
        const double v = parse_value(fields[3], name, lineno);
        if (is_dose_like(*var) && v < 0.0) {
            throw ParseError(name, lineno, "negative dose for " + fields[2]);
        }
        samples[*var].push_back({t, v});
    }

    Timestamp lo{std::numeric_limits<std::int64_t>::max()};
    Timestamp hi{std::numeric_limits<std::int64_t>::min()};
    for (auto& [var, rows] : samples) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Sample& a, const Sample& b) { return a.t < b.t; });
        lo = std::min(lo, rows.front().t);

        if (is_dose_like(var)) {
            EventSeries ev;
            ev.variable = var;
            for (const Sample& s : rows) ev.events.push_back({s.t, s.v});
            ev.validate();
            hi = std::max(hi, rows.back().t + 1);
            record.series[var] = std::move(ev);
            continue;
        }

        // Uniform reconstruction: step = gcd of timestamp deltas.
        std::int64_t step = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const std::int64_t d = rows[i].t - rows[i - 1].t;
            if (d <= 0) throw ParseError(name, 0, "duplicate timestamp in " +
                                                      std::string(to_string(var)));
            step = std::gcd(step, d);
        }
        if (step == 0) step = 300;  // single sample, canonical grid
        const std::size_t slots =
            static_cast<std::size_t>((rows.back().t - rows.front().t) / step) + 1;
        if (slots > kMaxSlots) {
            throw ParseError(name, 0, "irregular timestamps for " +
                                          std::string(to_string(var)) +
                                          " imply an oversized grid");
        }
        UniformSeries u;
        u.variable = var;
        u.start = rows.front().t;
        u.step_s = step;
        u.values.assign(slots, kGap);
        for (const Sample& s : rows) {
            u.values[static_cast<std::size_t>((s.t - u.start) / step)] = s.v;
        }
        hi = std::max(hi, u.end());
        record.series[var] = std::move(u);
    }

    if (!samples.empty()) {
        record.span_start = lo;
        record.span_end = hi;
    }
    return record;
}

PatientRecord read_patient_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return read_patient_csv(f, path);
}

} // namespace glycast
