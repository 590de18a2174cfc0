#include "frw/lifedata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "frw/error.hpp"

namespace frw {

namespace {

constexpr std::string_view kRocketMotor = "time,time2,kind,trunc_lower,count\n"
                                          "1,,right,,105\n"
                                          "2,,right,,164\n"
                                          "3,,right,,153\n"
                                          "4,,right,,236\n"
                                          "5,,right,,250\n"
                                          "6,,right,,197\n"
                                          "7,,right,,230\n"
                                          "8,,right,,211\n"
                                          "9,,right,,124\n"
                                          "10,,right,,90\n"
                                          "11,,right,,72\n"
                                          "12,,right,,53\n"
                                          "13,,right,,30\n"
                                          "14,,right,,14\n"
                                          "15,,right,,5\n"
                                          "16,,right,,3\n"
                                          "8.5,,left,,1\n"
                                          "14.2,,left,,1\n"
                                          "16.5,,left,,1\n";

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double parse_real(std::string_view field, const std::string &what) {
    double v = 0.0;
    const auto *end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw InputError(what + ": '" + std::string(field) + "' is not a finite number");
    }
    return v;
}

long parse_count(std::string_view field, const std::string &what) {
    long v = 0;
    const auto *end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end) {
        throw InputError(what + ": '" + std::string(field) + "' is not an integer");
    }
    if (v < 1) {
        throw InputError(what + ": count must be at least 1");
    }
    return v;
}

std::vector<Observation> parse_lifedata(std::istream &in, std::string_view source) {
    std::string line;
    long lineno = 0;
    std::map<std::string, std::size_t> cols;
    std::size_t ncols = 0;
    std::vector<Observation> out;
    const std::string src(source);
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto fields = split_fields(t);
        if (cols.empty()) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                static const std::vector<std::string> known{"time", "time2", "kind", "trunc_lower", "count"};
                if (std::find(known.begin(), known.end(), fields[i]) == known.end()) {
                    throw InputError(src + ":" + std::to_string(lineno) + ": unknown column '" + fields[i] + "'");
                }
                if (!cols.emplace(fields[i], i).second) {
                    throw InputError(src + ":" + std::to_string(lineno) + ": duplicate column '" + fields[i] + "'");
                }
            }
            if (!cols.count("time") || !cols.count("kind")) {
                throw InputError(src + ":" + std::to_string(lineno) + ": header must name 'time' and 'kind' columns");
            }
            ncols = fields.size();
            continue;
        }
        const std::string where = src + ":" + std::to_string(lineno);
        if (fields.size() != ncols) {
            throw InputError(where + ": expected " + std::to_string(ncols) + " fields, found " +
                             std::to_string(fields.size()));
        }
        auto field = [&](const char *name) -> std::string_view {
            const auto it = cols.find(name);
            return it == cols.end() ? std::string_view{} : std::string_view(fields[it->second]);
        };
        try {
            Observation obs;
            obs.time = parse_real(field("time"), "time");
            obs.kind = parse_obs_kind(field("kind"));
            if (!field("time2").empty()) {
                obs.time2 = parse_real(field("time2"), "time2");
            }
            if (!field("trunc_lower").empty()) {
                obs.truncation_lower = parse_real(field("trunc_lower"), "trunc_lower");
            }
            if (!field("count").empty()) {
                obs.count = parse_count(field("count"), "count");
            }
            validate(obs);
            out.push_back(obs);
        } catch (const InputError &e) {
            throw InputError(where + ": " + e.what());
        }
    }
    if (cols.empty()) {
        throw InputError(src + ": missing header row");
    }
    if (out.empty()) {
        throw InputError(src + ": no data rows");
    }
    return out;
}

std::vector<Observation> parse_lifedata_text(std::string_view text, std::string_view source) {
    std::istringstream in{std::string(text)};
    return parse_lifedata(in, source);
}

std::vector<std::string> bundled_datasets() { return {"rocket_motor"}; }

std::string_view bundled_dataset_text(std::string_view name) {
    if (name == "rocket_motor") {
        return kRocketMotor;
    }
    throw InputError("unknown bundled dataset '" + std::string(name) + "'");
}

std::vector<Observation> load_lifedata(const std::string &path) {
    for (const auto &name : bundled_datasets()) {
        if (path == name) {
            return parse_lifedata_text(bundled_dataset_text(name), name);
        }
    }
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open data file '" + path + "'");
    }
    return parse_lifedata(in, path);
}

void write_lifedata(std::ostream &out, const std::vector<Observation> &data) {
    out << "time,time2,kind,trunc_lower,count\n";
    for (const auto &o : data) {
        out << format_real(o.time) << ',' << (o.time2 ? format_real(*o.time2) : "") << ',' << to_string(o.kind) << ','
            << (o.truncation_lower ? format_real(*o.truncation_lower) : "") << ',' << o.count << '\n';
    }
}

} // namespace frw
