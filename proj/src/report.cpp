#include "btfp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "btfp/error.hpp"

namespace btfp::report {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
}

long long parse_int(const std::string& s, const fs::path& path, std::size_t line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line) + ": bad integer '" + s + "'");
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void check_label(const std::string& label) {
    if (label.find_first_of(",\"\n\r") != std::string::npos)
        throw ParameterError("label '" + label + "' cannot be written to CSV");
}

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

double nice_step(double range) {
    const double raw = range / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

} // namespace

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed on " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_fingerprints_csv(const fs::path& path, const std::vector<Fingerprint>& rows) {
    std::string out = std::string(kFingerprintHeader) + "\n";
    for (const auto& r : rows) {
        const std::string label = r.label.value_or("");
        check_label(label);
        out += label + "," + std::to_string(r.channel_index) + "," + std::to_string(r.start_sample) + "," +
               fixed(r.cfo_hz, 6) + "," + fixed(r.scaling_factor, 6) + "," + to_string(r.variant) + "\n";
    }
    write_text(path, out);
}

std::vector<Fingerprint> read_fingerprints_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines.front() != kFingerprintHeader)
        throw FormatError(path.string() + ": missing fingerprint CSV header");
    std::vector<Fingerprint> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv_line(lines[i]);
        if (f.size() != 6) throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": expected 6 fields");
        Fingerprint fp;
        if (!f[0].empty()) fp.label = f[0];
        fp.channel_index = static_cast<int>(parse_int(f[1], path, i + 1));
        fp.start_sample = static_cast<std::size_t>(parse_int(f[2], path, i + 1));
        fp.cfo_hz = parse_double(f[3], path, i + 1);
        fp.scaling_factor = parse_double(f[4], path, i + 1);
        try {
            fp.variant = variant_from_string(f[5]);
        } catch (const ParameterError& e) {
            throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
        }
        rows.push_back(std::move(fp));
    }
    return rows;
}

LabeledDataset to_dataset(const std::vector<Fingerprint>& rows) {
    LabeledDataset data;
    for (const auto& r : rows) {
        if (!r.label) throw FormatError("fingerprint row at sample " + std::to_string(r.start_sample) + " has no label");
        data.rows.push_back({{r.cfo_hz, r.scaling_factor}, *r.label});
    }
    return data;
}

void write_truth_csv(const fs::path& path, const synth::GroundTruth& truth) {
    std::string out = "label,channel,start_sample,end_sample,true_cfo_hz,true_deviation_hz,true_amplitude\n";
    for (const auto& t : truth) {
        check_label(t.label);
        out += t.label + "," + std::to_string(t.channel_index) + "," + std::to_string(t.start_sample) + "," +
               std::to_string(t.end_sample) + "," + fixed(t.true_cfo_hz, 6) + "," + fixed(t.true_deviation_hz, 6) +
               "," + fixed(t.true_amplitude, 9) + "\n";
    }
    write_text(path, out);
}

synth::GroundTruth read_truth_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw FormatError(path.string() + ": empty truth file");
    synth::GroundTruth truth;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv_line(lines[i]);
        if (f.size() != 7) throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": expected 7 fields");
        synth::TruthRow t;
        t.label = f[0];
        t.channel_index = static_cast<int>(parse_int(f[1], path, i + 1));
        t.start_sample = static_cast<std::size_t>(parse_int(f[2], path, i + 1));
        t.end_sample = static_cast<std::size_t>(parse_int(f[3], path, i + 1));
        t.true_cfo_hz = parse_double(f[4], path, i + 1);
        t.true_deviation_hz = parse_double(f[5], path, i + 1);
        t.true_amplitude = parse_double(f[6], path, i + 1);
        truth.push_back(std::move(t));
    }
    return truth;
}

void write_bursts(const fs::path& dir, const std::vector<Burst>& bursts, const ChannelPlan& plan) {
    fs::create_directories(dir);
    nlohmann::ordered_json index;
    index["plan"] = plan.name();
    index["sample_rate_hz"] = bursts.empty() ? 0.0 : bursts.front().samples.sample_rate_hz;
    auto list = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < bursts.size(); ++i) {
        const auto& b = bursts[i];
        char name[32];
        std::snprintf(name, sizeof name, "burst_%05zu.data", i);
        write_iq(b.samples, dir / name);
        nlohmann::ordered_json e;
        e["file"] = name;
        e["channel"] = b.channel_index;
        e["start_sample"] = b.start_sample;
        e["end_sample"] = b.end_sample;
        e["coarse_freq_hz"] = b.coarse_freq_hz;
        e["mean_power"] = b.mean_power;
        e["lead_samples"] = b.lead_samples;
        e["trail_samples"] = b.trail_samples;
        e["guard_clamped"] = b.guard_clamped;
        e["filter_taps"] = b.filter_taps;
        list.push_back(e);
    }
    index["bursts"] = list;
    write_text(dir / "bursts.json", index.dump(2) + "\n");
}

std::vector<Burst> read_bursts(const fs::path& dir) {
    nlohmann::json index;
    try {
        index = nlohmann::json::parse(read_text(dir / "bursts.json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad burst index in " + dir.string() + ": " + e.what());
    }
    std::vector<Burst> bursts;
    try {
        const double rate = index.at("sample_rate_hz").get<double>();
        for (const auto& e : index.at("bursts")) {
            Burst b;
            b.samples = read_iq(dir / e.at("file").get<std::string>(), rate, 0.0);
            b.channel_index = e.at("channel").get<int>();
            b.start_sample = e.at("start_sample").get<std::size_t>();
            b.end_sample = e.at("end_sample").get<std::size_t>();
            b.coarse_freq_hz = e.at("coarse_freq_hz").get<double>();
            b.mean_power = e.at("mean_power").get<double>();
            b.lead_samples = e.at("lead_samples").get<std::size_t>();
            b.trail_samples = e.at("trail_samples").get<std::size_t>();
            b.guard_clamped = e.at("guard_clamped").get<bool>();
            b.filter_taps = e.at("filter_taps").get<std::size_t>();
            bursts.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad burst index in " + dir.string() + ": " + e.what());
    }
    return bursts;
}

std::string scatter_svg(const LabeledDataset& data) {
    if (data.empty()) throw ParameterError("cannot plot an empty dataset");
    if (data.dimension() < 2) throw ParameterError("scatter plot needs two features");
    const double W = 800, H = 600, left = 90, right = 170, top = 50, bottom = 70;
    const double pw = W - left - right, ph = H - top - bottom;

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& r : data.rows) {
        xmin = std::min(xmin, r.features[0] / 1e3);
        xmax = std::max(xmax, r.features[0] / 1e3);
        ymin = std::min(ymin, r.features[1] / 1e3);
        ymax = std::max(ymax, r.features[1] / 1e3);
    }
    const auto widen = [](double& lo, double& hi) {
        const double span = hi - lo;
        const double pad = span > 0 ? 0.05 * span : std::max(1.0, std::abs(lo) * 0.05);
        lo -= pad;
        hi += pad;
    };
    widen(xmin, xmax);
    widen(ymin, ymax);
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

    const auto labels = data.labels();
    std::map<std::string, std::size_t> color;
    for (std::size_t i = 0; i < labels.size(); ++i) color[labels[i]] = i % std::size(kPalette);

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    s += "<text x=\"" + fixed(left + pw / 2, 1) + "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">"
         "CFO vs scaling factor</text>\n";
    s += "<rect x=\"" + fixed(left, 1) + "\" y=\"" + fixed(top, 1) + "\" width=\"" + fixed(pw, 1) + "\" height=\"" +
         fixed(ph, 1) + "\" fill=\"none\" stroke=\"black\"/>\n";

    const double xs = nice_step(xmax - xmin), ys = nice_step(ymax - ymin);
    for (double t = std::ceil(xmin / xs) * xs; t <= xmax; t += xs) {
        const double x = px(t);
        s += "<line x1=\"" + fixed(x, 2) + "\" y1=\"" + fixed(top + ph, 2) + "\" x2=\"" + fixed(x, 2) + "\" y2=\"" +
             fixed(top + ph + 5, 2) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fixed(x, 2) + "\" y=\"" + fixed(top + ph + 20, 2) + "\" text-anchor=\"middle\">" +
             general(std::abs(t) < xs * 1e-9 ? 0.0 : t) + "</text>\n";
    }
    for (double t = std::ceil(ymin / ys) * ys; t <= ymax; t += ys) {
        const double y = py(t);
        s += "<line x1=\"" + fixed(left - 5, 2) + "\" y1=\"" + fixed(y, 2) + "\" x2=\"" + fixed(left, 2) + "\" y2=\"" +
             fixed(y, 2) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fixed(left - 8, 2) + "\" y=\"" + fixed(y + 4, 2) + "\" text-anchor=\"end\">" +
             general(std::abs(t) < ys * 1e-9 ? 0.0 : t) + "</text>\n";
    }
    s += "<text x=\"" + fixed(left + pw / 2, 1) + "\" y=\"" + fixed(H - 20, 1) +
         "\" text-anchor=\"middle\">CFO (kHz)</text>\n";
    s += "<text x=\"25\" y=\"" + fixed(top + ph / 2, 1) + "\" text-anchor=\"middle\" transform=\"rotate(-90 25 " +
         fixed(top + ph / 2, 1) + ")\">Scaling factor (kHz)</text>\n";

    s += "<g id=\"points\">\n";
    for (const auto& r : data.rows)
        s += "<circle cx=\"" + fixed(px(r.features[0] / 1e3), 2) + "\" cy=\"" + fixed(py(r.features[1] / 1e3), 2) +
             "\" r=\"2.5\" fill=\"" + kPalette[color[r.label]] + "\" fill-opacity=\"0.7\"/>\n";
    s += "</g>\n";

    s += "<g id=\"legend\">\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = top + 10 + 20.0 * static_cast<double>(i);
        s += "<rect x=\"" + fixed(W - right + 15, 1) + "\" y=\"" + fixed(y, 1) + "\" width=\"10\" height=\"10\" fill=\"" +
             kPalette[color[labels[i]]] + "\"/>\n";
        s += "<text x=\"" + fixed(W - right + 32, 1) + "\" y=\"" + fixed(y + 9, 1) + "\">" + labels[i] + "</text>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

void emit_scatter_svg(const LabeledDataset& data, const fs::path& path) { write_text(path, scatter_svg(data)); }

void emit_report(const EvalReport& report, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    nlohmann::ordered_json j;
    j["Accuracy"] = report.accuracy;
    j["Precision"] = report.precision;
    j["Recall"] = report.recall;
    j["F1 score"] = report.f1;
    auto per = nlohmann::ordered_json::array();
    for (const auto& c : report.per_class) {
        nlohmann::ordered_json e;
        e["label"] = c.label;
        e["precision"] = c.precision;
        e["recall"] = c.recall;
        e["f1"] = c.f1;
        e["support"] = c.support;
        per.push_back(e);
    }
    j["per_class"] = per;
    write_text(out_dir / "metrics.json", j.dump(2) + "\n");

    std::string raw = "true\\predicted";
    for (const auto& l : report.labels) raw += "," + l;
    raw += "\n";
    std::string norm = raw;
    const auto normalized = confusion_normalize(report.confusion);
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        raw += report.labels[i];
        norm += report.labels[i];
        for (std::size_t k = 0; k < report.labels.size(); ++k) {
            raw += "," + std::to_string(report.confusion[i][k]);
            norm += "," + fixed(normalized.matrix[i][k], 6);
        }
        raw += "\n";
        norm += "\n";
    }
    write_text(out_dir / "confusion.csv", raw);
    write_text(out_dir / "confusion_normalized.csv", norm);
}

std::string metrics_table(const EvalReport& report) {
    std::string s = "| Metric | Value |\n|---|---|\n";
    s += "| Accuracy | " + fixed(report.accuracy, 4) + " |\n";
    s += "| Precision | " + fixed(report.precision, 4) + " |\n";
    s += "| Recall | " + fixed(report.recall, 4) + " |\n";
    s += "| F1 score | " + fixed(report.f1, 4) + " |\n";
    return s;
}

} // namespace btfp::report
