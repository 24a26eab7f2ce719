#include "fdlpv/error.hpp"
#include "fdlpv/frf.hpp"
#include "fdlpv/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fdlpv {

namespace {

using nlohmann::json;

struct Row {
    std::string channel;
    double p;
    double omega;
    Complex value;
    std::string where;
};

struct Meta {
    double sample_rate = 1.0;
    bool has_range = false;
    double lo = 0.0;
    double hi = 0.0;
};

double parse_field(std::string_view s, const std::string& where, const char* name) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(ErrorKind::Parse, where + ": cannot parse field '" + name + "' from '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

void parse_meta_line(std::string_view line, Meta& meta, const std::string& where) {
    line.remove_prefix(1);
    while (!line.empty() && line.front() == ' ')
        line.remove_prefix(1);
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
        return;
    const std::string_view key = line.substr(0, eq);
    const std::string_view value = line.substr(eq + 1);
    if (key == "sample_rate") {
        meta.sample_rate = parse_field(value, where, "sample_rate");
    } else if (key == "range") {
        auto parts = split(value, ',');
        if (parts.size() != 2)
            fail(ErrorKind::Parse, where + ": range needs two comma-separated values");
        meta.lo = parse_field(parts[0], where, "range");
        meta.hi = parse_field(parts[1], where, "range");
        meta.has_range = true;
    }
}

std::vector<Row> read_csv(std::istream& in, const std::string& path, Meta& meta) {
    std::vector<Row> rows;
    std::string line;
    size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.front() == '#') {
            parse_meta_line(line, meta, where);
            continue;
        }
        if (!header_seen) {
            if (line != "channel,p,omega,re,im")
                fail(ErrorKind::Parse, where + ": expected header 'channel,p,omega,re,im'");
            header_seen = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 5)
            fail(ErrorKind::Parse, where + ": expected 5 fields, found " + std::to_string(f.size()));
        Row r;
        r.channel = std::string(f[0]);
        if (r.channel.empty())
            fail(ErrorKind::Parse, where + ": empty channel label");
        r.p = parse_field(f[1], where, "p");
        r.omega = parse_field(f[2], where, "omega");
        r.value = {parse_field(f[3], where, "re"), parse_field(f[4], where, "im")};
        r.where = where;
        rows.push_back(std::move(r));
    }
    if (!header_seen)
        fail(ErrorKind::Parse, path + ": missing header 'channel,p,omega,re,im'");
    return rows;
}

std::vector<Row> read_json(std::istream& in, const std::string& path, Meta& meta) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, path + ": byte " + std::to_string(e.byte) + ": " + e.what());
    }
    std::vector<Row> rows;
    try {
        if (doc.contains("sample_rate"))
            meta.sample_rate = doc.at("sample_rate").get<double>();
        if (doc.contains("range")) {
            meta.lo = doc.at("range").at(0).get<double>();
            meta.hi = doc.at("range").at(1).get<double>();
            meta.has_range = true;
        }
        const json& arr = doc.at("rows");
        for (size_t i = 0; i < arr.size(); ++i) {
            const json& r = arr[i];
            Row row;
            row.where = path + ": rows[" + std::to_string(i) + "]";
            row.channel = r.at("channel").get<std::string>();
            row.p = r.at("p").get<double>();
            row.omega = r.at("omega").get<double>();
            row.value = {r.at("re").get<double>(), r.at("im").get<double>()};
            rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, path + ": " + e.what());
    }
    return rows;
}

FrfDataset build(const std::vector<Row>& rows, const Meta& meta, const std::string& path) {
    require(!rows.empty(), ErrorKind::Parse, path + ": no data rows");
    // Blocks are maximal runs of equal (channel, p).
    struct Block {
        std::string channel;
        double p;
        std::vector<double> omegas;
        std::vector<Complex> values;
        std::string where;
    };
    std::vector<Block> blocks;
    for (const Row& r : rows) {
        if (blocks.empty() || blocks.back().channel != r.channel || blocks.back().p != r.p) {
            for (const Block& b : blocks)
                if (b.channel == r.channel && b.p == r.p)
                    fail(ErrorKind::Parse, r.where + ": block (" + r.channel + ", p) appears twice");
            blocks.push_back({r.channel, r.p, {}, {}, r.where});
        }
        Block& b = blocks.back();
        if (!b.omegas.empty() && r.omega <= b.omegas.back())
            fail(ErrorKind::Parse, r.where + ": frequencies not strictly increasing");
        b.omegas.push_back(r.omega);
        b.values.push_back(r.value);
    }
    const std::vector<double>& ref = blocks.front().omegas;
    for (const Block& b : blocks)
        if (b.omegas != ref)
            fail(ErrorKind::GridMismatch, b.where + ": block (" + b.channel + ") uses a different frequency grid");

    std::vector<double> points;
    std::vector<std::string> channels;
    for (const Block& b : blocks) {
        if (std::find(points.begin(), points.end(), b.p) == points.end())
            points.push_back(b.p);
        if (std::find(channels.begin(), channels.end(), b.channel) == channels.end())
            channels.push_back(b.channel);
    }
    std::sort(points.begin(), points.end());
    const double lo = meta.has_range ? meta.lo : points.front();
    const double hi = meta.has_range ? meta.hi : points.back();
    GridPtr grid;
    try {
        grid = make_grid(FrequencyGrid(ref, meta.sample_rate));
    } catch (const Error& e) {
        fail(ErrorKind::Parse, blocks.front().where + ": " + e.what());
    }
    FrfDataset ds(grid, SchedulingGrid(points, lo, hi), channels);
    for (const Block& b : blocks)
        ds.set(b.p, b.channel, FrfResponse(b.values, grid));
    try {
        ds.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Parse, path + ": " + e.what());
    }
    return ds;
}

bool is_json_path(const std::string& path) {
    return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

} // namespace

FrfDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open dataset file '" + path + "'");
    Meta meta;
    std::vector<Row> rows = is_json_path(path) ? read_json(in, path, meta) : read_csv(in, path, meta);
    return build(rows, meta, path);
}

void save_dataset(const FrfDataset& dataset, const std::string& path) {
    dataset.validate();
    const FrequencyGrid& grid = dataset.grid();
    std::ostringstream os;
    if (is_json_path(path)) {
        json doc;
        doc["sample_rate"] = grid.sample_rate();
        doc["range"] = {dataset.scheduling().lo(), dataset.scheduling().hi()};
        json rows = json::array();
        for (const std::string& ch : dataset.channels())
            for (double p : dataset.scheduling().points()) {
                const FrfResponse& r = dataset.at(p, ch);
                for (size_t k = 0; k < grid.size(); ++k)
                    rows.push_back({{"channel", ch}, {"p", p}, {"omega", grid[k]}, {"re", r[k].real()}, {"im", r[k].imag()}});
            }
        doc["rows"] = std::move(rows);
        os << doc.dump(1) << '\n';
    } else {
        os << "# sample_rate=" << format_double(grid.sample_rate()) << '\n';
        os << "# range=" << format_double(dataset.scheduling().lo()) << ',' << format_double(dataset.scheduling().hi())
           << '\n';
        os << "channel,p,omega,re,im\n";
        for (const std::string& ch : dataset.channels())
            for (double p : dataset.scheduling().points()) {
                const FrfResponse& r = dataset.at(p, ch);
                const std::string ps = format_double(p);
                for (size_t k = 0; k < grid.size(); ++k)
                    os << ch << ',' << ps << ',' << format_double(grid[k]) << ',' << format_double(r[k].real()) << ','
                       << format_double(r[k].imag()) << '\n';
            }
    }
    write_file_atomic(path, os.str());
}

} // namespace fdlpv
