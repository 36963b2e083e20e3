#include "nilm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nilm/signature_tree.hpp"

namespace nilm::io {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos)));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

double require_double(std::string_view s, std::size_t line, const std::string& field) {
    const auto v = parse_double(s);
    if (!v) {
        throw ParseError("non-numeric " + field + " value '" + std::string(s) + "'", line, field);
    }
    return *v;
}

// Reads the next non-blank line; returns false at end of input.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            return true;
        }
    }
    return false;
}

std::optional<std::size_t> column_index(const std::vector<std::string_view>& header,
                                        std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<std::string_view> expect_header(std::istream& in, std::string& header_line,
                                            std::size_t& line_no, std::string_view what) {
    if (!next_line(in, header_line, line_no)) {
        throw ParseError(std::string(what) + " file is empty", 0, "header");
    }
    return split_csv(header_line);
}

}  // namespace

std::string format_fixed(double v, int decimals) {
    char buf[64];
    if (v == 0.0) {
        v = 0.0;  // drop the sign of negative zero
    }
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    std::string s(buf, r.ptr);
    if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) {
        s.erase(0, 1);  // "-0.000000" after rounding
    }
    return s;
}

PowerSeries read_power_csv(std::istream& in, double rate, const PowerCsvOptions& options) {
    if (!(rate > 0.0)) {
        throw std::invalid_argument("read_power_csv: rate must be positive");
    }
    std::string header_line;
    std::size_t line_no = 0;
    const auto header = expect_header(in, header_line, line_no, "power");
    const auto pcol = column_index(header, options.column);
    if (!pcol) {
        throw ParseError("missing power column '" + options.column + "'", line_no, options.column);
    }
    std::optional<std::size_t> tcol;
    std::string tname = options.time_column;
    if (!tname.empty()) {
        tcol = column_index(header, tname);
        if (!tcol) {
            throw ParseError("missing time column '" + tname + "'", line_no, tname);
        }
    } else {
        for (const char* cand : {"t", "time", "timestamp"}) {
            if ((tcol = column_index(header, cand))) {
                tname = cand;
                break;
            }
        }
    }

    std::vector<double> samples;
    std::optional<double> origin;
    double prev_t = 0.0;
    const double period = 1.0 / rate;
    std::string line;
    while (next_line(in, line, line_no)) {
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             line_no);
        }
        samples.push_back(require_double(cells[*pcol], line_no, options.column));
        if (tcol) {
            const double t = require_double(cells[*tcol], line_no, tname);
            if (origin && std::abs((t - prev_t) - period) > 0.01 * period) {
                throw ParseError("non-uniform timestamps: step " + format_fixed(t - prev_t) +
                                     " s, expected " + format_fixed(period) + " s",
                                 line_no, tname);
            }
            if (!origin) {
                origin = t;
            }
            prev_t = t;
        }
    }
    if (samples.empty()) {
        throw ParseError("power file has no data rows", line_no, options.column);
    }
    return PowerSeries(std::move(samples), rate, origin.value_or(0.0));
}

PowerSeries read_power_csv(const std::filesystem::path& path, double rate,
                           const PowerCsvOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    return read_power_csv(in, rate, options);
}

void write_power_csv(std::ostream& out, const PowerSeries& series) {
    out << "t,power\n";
    for (Index i = 0; i < series.size(); ++i) {
        out << format_fixed(series.time_of(i)) << ',' << format_fixed(series[i]) << '\n';
    }
}

std::vector<EventRecord> to_records(const PowerSeries& series,
                                    std::span<const DetectedEvent> events) {
    std::vector<EventRecord> out;
    out.reserve(events.size());
    for (const auto& ev : events) {
        EventRecord r;
        r.start_time = series.time_of(ev.start);
        if (ev.spike) {
            r.spike_time = series.time_of(*ev.spike);
        }
        r.end_time = series.time_of(ev.end);
        r.direction = ev.direction;
        r.pre_mean = ev.pre_mean;
        r.post_mean = ev.post_mean;
        r.provenance = ev.provenance;
        out.push_back(r);
    }
    return out;
}

void write_events_csv(std::ostream& out, std::span<const EventRecord> events) {
    out << events_header << '\n';
    for (const auto& e : events) {
        out << format_fixed(e.start_time) << ','
            << (e.spike_time ? format_fixed(*e.spike_time) : std::string()) << ','
            << format_fixed(e.end_time) << ',' << to_string(e.direction) << ','
            << format_fixed(e.pre_mean) << ',' << format_fixed(e.post_mean) << ','
            << to_string(e.provenance) << '\n';
    }
}

std::vector<EventRecord> read_events_csv(std::istream& in) {
    std::string header_line;
    std::size_t line_no = 0;
    const auto header = expect_header(in, header_line, line_no, "events");
    if (trim(header_line) != events_header) {
        throw ParseError("unexpected events header", line_no, "header");
    }
    std::vector<EventRecord> out;
    std::string line;
    while (next_line(in, line, line_no)) {
        const auto c = split_csv(line);
        if (c.size() != 7) {
            throw ParseError("expected 7 fields, found " + std::to_string(c.size()), line_no);
        }
        EventRecord r;
        r.start_time = require_double(c[0], line_no, "start_time");
        if (!c[1].empty()) {
            r.spike_time = require_double(c[1], line_no, "spike_time");
        }
        r.end_time = require_double(c[2], line_no, "end_time");
        const auto dir = parse_direction(c[3]);
        if (!dir) {
            throw ParseError("bad direction '" + std::string(c[3]) + "'", line_no, "direction");
        }
        r.direction = *dir;
        r.pre_mean = require_double(c[4], line_no, "pre_mean");
        r.post_mean = require_double(c[5], line_no, "post_mean");
        const auto prov = parse_provenance(c[6]);
        if (!prov) {
            throw ParseError("bad provenance '" + std::string(c[6]) + "'", line_no, "provenance");
        }
        r.provenance = *prov;
        const double spike = r.spike_time.value_or(r.start_time);
        if (spike < r.start_time || r.end_time < spike || r.end_time < r.start_time) {
            throw ParseError("event times out of order", line_no, "end_time");
        }
        if (!out.empty() && r.start_time < out.back().start_time) {
            throw ParseError("events not in time order", line_no, "start_time");
        }
        out.push_back(r);
    }
    return out;
}

std::vector<TimeSpan> record_spans(std::span<const EventRecord> events) {
    std::vector<TimeSpan> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        out.push_back({e.start_time, e.end_time});
    }
    return out;
}

void write_truth_csv(std::ostream& out, std::span<const GroundTruthEvent> truth) {
    out << "time,label\n";
    for (const auto& g : truth) {
        out << format_fixed(g.time) << ',' << g.label << '\n';
    }
}

std::vector<GroundTruthEvent> read_truth_csv(std::istream& in) {
    std::string header_line;
    std::size_t line_no = 0;
    const auto header = expect_header(in, header_line, line_no, "truth");
    const auto tcol = column_index(header, "time");
    if (!tcol) {
        throw ParseError("missing time column 'time'", line_no, "time");
    }
    const auto lcol = column_index(header, "label");
    std::vector<GroundTruthEvent> out;
    std::string line;
    while (next_line(in, line, line_no)) {
        const auto c = split_csv(line);
        if (c.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(c.size()),
                             line_no);
        }
        GroundTruthEvent g;
        g.time = require_double(c[*tcol], line_no, "time");
        if (lcol) {
            g.label = std::string(c[*lcol]);
        }
        if (!out.empty() && g.time < out.back().time) {
            throw ParseError("truth times out of order", line_no, "time");
        }
        out.push_back(std::move(g));
    }
    return out;
}

ParameterGrid parse_grid(std::istream& in) {
    ParameterGrid grid;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        std::istringstream fields(line.substr(0, hash));
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) {
            tok.push_back(t);
        }
        if (tok.empty()) {
            continue;
        }
        if (tok.size() != 4) {
            throw ParseError("expected 'name min max increment'", line_no);
        }
        GridRow row;
        row.name = tok[0];
        row.min = require_double(tok[1], line_no, "min");
        row.max = require_double(tok[2], line_no, "max");
        row.increment = require_double(tok[3], line_no, "increment");
        if (!(row.increment > 0.0)) {
            throw ParseError("increment must be positive", line_no, "increment");
        }
        if (row.min > row.max) {
            throw ParseError("min exceeds max", line_no, "min");
        }
        for (const auto& r : grid.rows) {
            if (r.name == row.name) {
                throw ParseError("duplicate parameter '" + row.name + "'", line_no, "name");
            }
        }
        grid.rows.push_back(row);
    }
    if (grid.rows.empty()) {
        throw ParseError("grid file has no parameters");
    }
    return grid;
}

namespace {

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        const auto line = 1 + static_cast<std::size_t>(
                                  std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
        throw ParseError("malformed " + std::string(what) + ": " + e.what(), line);
    }
}

double number_field(const json& obj, const char* key, std::string_view where) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw ParseError(std::string(where) + ": missing or non-numeric '" + key + "'", 0, key);
    }
    return it->get<double>();
}

GaussianParam pair_field(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
        !(*it)[1].is_number()) {
        throw ParseError(std::string("signature set: '") + key + "' must be [mean, std]", 0, key);
    }
    GaussianParam g{(*it)[0].get<double>(), (*it)[1].get<double>(), 1};
    if (g.std < 0.0) {
        throw ParseError(std::string("signature set: negative std in '") + key + "'", 0, key);
    }
    return g;
}

SignatureSet set_from_json(const json& j) {
    if (!j.is_object()) {
        throw ParseError("signature set must be an object");
    }
    SignatureSet s;
    const auto form = j.find("form");
    std::optional<WaveForm> f;
    if (form != j.end() && form->is_string()) {
        f = parse_waveform(form->get<std::string>());
    }
    if (!f) {
        throw ParseError("signature set: 'form' must be \"R\" or \"D\"", 0, "form");
    }
    s.form = *f;
    s.alpha = pair_field(j, "alpha");
    s.gamma = pair_field(j, "gamma");
    s.beta = pair_field(j, "beta");
    s.delta = pair_field(j, "delta");
    s.mu = pair_field(j, "mu");
    s.tau = pair_field(j, "tau");
    s.label = {0, 1};
    if (const auto l = j.find("label"); l != j.end()) {
        if (!l->is_array() || l->size() != 2 || !(*l)[0].is_number_integer() ||
            !(*l)[1].is_number_integer()) {
            throw ParseError("signature set: 'label' must be [from, to]", 0, "label");
        }
        s.label = {(*l)[0].get<int>(), (*l)[1].get<int>()};
    }
    return s;
}

}  // namespace

SignatureSet parse_signature_set(std::string_view json_text) {
    return set_from_json(parse_json(json_text, "signature set"));
}

ScenarioSpec parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json doc = parse_json(json_text, "scenario");
    if (!doc.is_object()) {
        throw ParseError("scenario must be a JSON object");
    }
    ScenarioSpec spec;
    spec.rate = number_field(doc, "rate", "scenario");
    spec.duration = number_field(doc, "duration", "scenario");
    if (doc.contains("noise_std")) {
        spec.noise_std = number_field(doc, "noise_std", "scenario");
    }
    if (doc.contains("min_gap")) {
        spec.min_gap = number_field(doc, "min_gap", "scenario");
    }
    if (doc.contains("seed")) {
        const auto& s = doc["seed"];
        if (!s.is_number_unsigned()) {
            throw ParseError("scenario: 'seed' must be a non-negative integer", 0, "seed");
        }
        spec.seed = s.get<std::uint64_t>();
    }
    const auto apps = doc.find("appliances");
    if (apps == doc.end() || !apps->is_array()) {
        throw ParseError("scenario: missing 'appliances' array", 0, "appliances");
    }
    for (std::size_t i = 0; i < apps->size(); ++i) {
        const json& a = (*apps)[i];
        const std::string where = "appliances[" + std::to_string(i) + "]";
        if (!a.is_object() || !a.contains("name") || !a["name"].is_string()) {
            throw ParseError(where + ": missing 'name'", 0, "name");
        }
        ApplianceEntry e;
        e.name = a["name"].get<std::string>();
        if (a.contains("set")) {
            e.on = set_from_json(a["set"]);
        } else if (a.contains("tree")) {
            if (!a["tree"].is_string()) {
                throw ParseError(where + ": 'tree' must be a path", 0, "tree");
            }
            const auto tree = deserialize_tree(read_text_file(base_dir / a["tree"].get<std::string>()));
            const std::string key =
                a.contains("appliance") && a["appliance"].is_string() ? a["appliance"].get<std::string>()
                                                                     : e.name;
            const ApplianceNode* node = tree.find(key);
            if (node == nullptr) {
                throw ParseError(where + ": appliance '" + key + "' not in tree", 0, "appliance");
            }
            const SignatureSet* on = nullptr;
            for (const auto& p : node->paths) {
                if (p.label.from < p.label.to &&
                    (on == nullptr || p.label < on->label)) {
                    on = &p;
                }
            }
            if (on == nullptr) {
                throw ParseError(where + ": tree has no rising transition for '" + key + "'", 0,
                                 "label");
            }
            e.on = *on;
            for (const auto& p : node->paths) {
                if (p.label.from == on->label.to && p.label.to == on->label.from) {
                    e.off = p;
                }
            }
        } else {
            throw ParseError(where + ": needs 'set' or 'tree'", 0, "set");
        }
        if (a.contains("activations")) {
            const auto& acts = a["activations"];
            if (!acts.is_array()) {
                throw ParseError(where + ": 'activations' must be an array", 0, "activations");
            }
            for (const auto& t : acts) {
                if (!t.is_number()) {
                    throw ParseError(where + ": non-numeric activation", 0, "activations");
                }
                e.activations.push_back(t.get<double>());
            }
        }
        if (a.contains("count")) {
            if (!a["count"].is_number_unsigned()) {
                throw ParseError(where + ": 'count' must be a non-negative integer", 0, "count");
            }
            e.count = a["count"].get<std::size_t>();
        }
        if (a.contains("noise_std")) {
            e.noise_std = number_field(a, "noise_std", where);
        }
        if (a.contains("tdt_scale")) {
            e.tdt_scale = number_field(a, "tdt_scale", where);
        }
        spec.appliances.push_back(std::move(e));
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& ex) {
        throw ParseError(ex.what());
    }
    return spec;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

}  // namespace nilm::io
