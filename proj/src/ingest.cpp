#include "hybridhi/ingest.hpp"

#include "hybridhi/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hybridhi::ingest {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int unit_id_from_stem(const std::string& stem, int fallback) {
    std::string digits;
    for (char ch : stem)
        if (ch >= '0' && ch <= '9') digits += ch;
    if (digits.empty()) return fallback;
    return std::stoi(digits);
}

std::map<int, std::string> read_manifest(const fs::path& dir) {
    std::map<int, std::string> tags;
    std::ifstream in(dir / "units.txt");
    int id = 0;
    std::string tag;
    while (in >> id >> tag) tags[id] = tag;
    return tags;
}

Unit load_unit(const fs::path& file, const ColumnMap& cols, std::size_t& p, std::size_t& k) {
    const std::string name = file.filename().string();
    std::ifstream in(file);
    if (!in) throw LoadError(name, 0, "cannot open file");
    std::string header_line;
    if (!std::getline(in, header_line)) throw LoadError(name, 1, "missing header row");
    const auto header = split(header_line);

    auto find = [&](const std::string& col) -> long {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == col) return static_cast<long>(i);
        return -1;
    };

    const long cycle_col = find(cols.cycle);
    if (cycle_col < 0) throw LoadError(name, 1, "missing column '" + cols.cycle + "'");
    auto resolve = [&](const std::vector<std::string>& wanted, const char* prefix) {
        std::vector<long> idx;
        if (wanted.empty()) {
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i].substr(0, 2) == prefix) idx.push_back(static_cast<long>(i));
            if (idx.empty()) throw LoadError(name, 1, std::string("no columns with prefix '") + prefix + "'");
        } else {
            for (const auto& w : wanted) {
                const long i = find(w);
                if (i < 0) throw LoadError(name, 1, "missing column '" + w + "'");
                idx.push_back(i);
            }
        }
        return idx;
    };
    const auto w_cols = resolve(cols.conditions, "w_");
    const auto x_cols = resolve(cols.sensors, "x_");
    const long hi_col = cols.hi.empty() ? -1 : find(cols.hi);

    if (p == 0) {
        p = x_cols.size();
        k = w_cols.size();
    } else if (p != x_cols.size() || k != w_cols.size()) {
        throw LoadError(name, 1, "channel count differs from other units");
    }

    struct Rows {
        std::vector<double> x, w;
        double hi = std::nan("");
        std::size_t n = 0;
    };
    std::map<int, Rows> by_cycle;
    std::string line;
    std::size_t row = 1;
    int last_cycle = std::numeric_limits<int>::min();
    std::vector<double> xs(p), ws(k);
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw LoadError(name, row, "expected " + std::to_string(header.size()) + " fields, got " +
                                           std::to_string(fields.size()));
        double cyc = 0;
        if (!parse_double(fields[static_cast<std::size_t>(cycle_col)], cyc) || cyc != std::floor(cyc))
            throw LoadError(name, row, "cycle index is not an integer");
        const int t = static_cast<int>(cyc);
        if (cols.strict_order && t < last_cycle) throw LoadError(name, row, "non-monotone cycle index");
        last_cycle = t;
        for (std::size_t j = 0; j < p; ++j)
            if (!parse_double(fields[static_cast<std::size_t>(x_cols[j])], xs[j]))
                throw LoadError(name, row, "unparseable sensor value");
        for (std::size_t j = 0; j < k; ++j)
            if (!parse_double(fields[static_cast<std::size_t>(w_cols[j])], ws[j]))
                throw LoadError(name, row, "unparseable condition value");
        Rows& r = by_cycle[t];
        if (hi_col >= 0) {
            double h = 0;
            if (!parse_double(fields[static_cast<std::size_t>(hi_col)], h))
                throw LoadError(name, row, "unparseable ground-truth HI");
            if (r.n > 0 && h != r.hi) throw LoadError(name, row, "ground-truth HI varies within a cycle");
            r.hi = h;
        }
        r.x.insert(r.x.end(), xs.begin(), xs.end());
        r.w.insert(r.w.end(), ws.begin(), ws.end());
        ++r.n;
    }
    if (by_cycle.empty()) throw LoadError(name, 0, "unit has no rows");

    Unit unit;
    std::vector<double> hi;
    for (auto& [t, r] : by_cycle) {
        CycleRecord rec;
        rec.t = t;
        rec.x = Eigen::Map<const RowMatrix>(r.x.data(), static_cast<Eigen::Index>(r.n), static_cast<Eigen::Index>(p));
        rec.w = Eigen::Map<const RowMatrix>(r.w.data(), static_cast<Eigen::Index>(r.n), static_cast<Eigen::Index>(k));
        unit.cycles.push_back(std::move(rec));
        hi.push_back(r.hi);
    }
    if (hi_col >= 0) unit.hi_gt = std::move(hi);
    return unit;
}

}  // namespace

FleetDataset load_fleet(const fs::path& dir, const ColumnMap& columns) {
    if (!fs::is_directory(dir)) throw DataError("fleet directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    if (files.empty()) throw DataError("no units found in " + dir.string());
    std::sort(files.begin(), files.end());

    const auto tags = read_manifest(dir);
    FleetDataset fleet;
    int fallback = 0;
    for (const auto& f : files) {
        Unit u = load_unit(f, columns, fleet.n_sensors, fleet.n_conditions);
        u.id = unit_id_from_stem(f.stem().string(), fallback++);
        if (auto it = tags.find(u.id); it != tags.end()) u.class_tag = it->second;
        fleet.units.push_back(std::move(u));
    }
    std::sort(fleet.units.begin(), fleet.units.end(), [](const Unit& a, const Unit& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < fleet.units.size(); ++i)
        if (fleet.units[i].id == fleet.units[i - 1].id)
            throw DataError("duplicate unit id " + std::to_string(fleet.units[i].id));
    fleet.validate();
    return fleet;
}

void write_fleet(const FleetDataset& fleet, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream manifest(dir / "units.txt");
    for (const auto& u : fleet.units) {
        manifest << u.id << ' ' << (u.class_tag.empty() ? "-" : u.class_tag) << '\n';
        std::ostringstream name;
        name << "unit_";
        name.width(4);
        name.fill('0');
        name << u.id << ".csv";
        std::ofstream out(dir / name.str());
        if (!out) throw DataError("cannot write " + (dir / name.str()).string());
        out << "cycle";
        for (std::size_t j = 0; j < fleet.n_conditions; ++j) out << ",w_" << j;
        for (std::size_t j = 0; j < fleet.n_sensors; ++j) out << ",x_" << j;
        if (u.hi_gt) out << ",hi_gt";
        out << '\n';
        for (std::size_t ci = 0; ci < u.cycles.size(); ++ci) {
            const auto& c = u.cycles[ci];
            for (Eigen::Index r = 0; r < c.x.rows(); ++r) {
                out << c.t;
                for (Eigen::Index j = 0; j < c.w.cols(); ++j) out << ',' << format_double(c.w(r, j));
                for (Eigen::Index j = 0; j < c.x.cols(); ++j) out << ',' << format_double(c.x(r, j));
                if (u.hi_gt) out << ',' << format_double((*u.hi_gt)[ci]);
                out << '\n';
            }
        }
    }
}

namespace {

void column_range(const FleetDataset& fleet, bool sensors, Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
    const auto n = static_cast<Eigen::Index>(sensors ? fleet.n_sensors : fleet.n_conditions);
    lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    hi = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    for (const auto& u : fleet.units)
        for (const auto& c : u.cycles) {
            const RowMatrix& m = sensors ? c.x : c.w;
            if (m.rows() == 0) continue;
            lo = lo.cwiseMin(m.colwise().minCoeff().transpose());
            hi = hi.cwiseMax(m.colwise().maxCoeff().transpose());
        }
}

void scale_inplace(RowMatrix& m, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, bool inverse) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double span = hi(j) - lo(j);
        if (span > 0) {
            if (inverse)
                m.col(j) = (m.col(j).array() * span + lo(j)).matrix();
            else
                m.col(j) = ((m.col(j).array() - lo(j)) / span).matrix();
        } else if (inverse) {
            m.col(j).setConstant(lo(j));
        } else {
            m.col(j).setZero();
        }
    }
}

}  // namespace

Scaler fit_scaler(const FleetDataset& train) {
    if (train.units.empty()) throw DataError("fit_scaler: training fleet is empty");
    Scaler s;
    column_range(train, true, s.x_min, s.x_max);
    column_range(train, false, s.w_min, s.w_max);
    if (!s.x_min.allFinite() || !s.w_min.allFinite()) throw DataError("fit_scaler: training fleet has no rows");
    for (Eigen::Index j = 0; j < s.x_min.size(); ++j)
        if (s.x_max(j) == s.x_min(j))
            s.warnings.push_back({"constant_channel", "sensor x_" + std::to_string(j) + " is constant; mapped to 0"});
    for (Eigen::Index j = 0; j < s.w_min.size(); ++j)
        if (s.w_max(j) == s.w_min(j))
            s.warnings.push_back({"constant_channel", "condition w_" + std::to_string(j) + " is constant; mapped to 0"});
    return s;
}

FleetDataset Scaler::apply(const FleetDataset& fleet) const {
    if (static_cast<Eigen::Index>(fleet.n_sensors) != x_min.size() ||
        static_cast<Eigen::Index>(fleet.n_conditions) != w_min.size())
        throw ShapeError("scaler channel count does not match fleet");
    FleetDataset out = fleet;
    for (auto& u : out.units)
        for (auto& c : u.cycles) {
            scale_inplace(c.x, x_min, x_max, false);
            scale_inplace(c.w, w_min, w_max, false);
        }
    return out;
}

FleetDataset Scaler::invert(const FleetDataset& fleet) const {
    FleetDataset out = fleet;
    for (auto& u : out.units)
        for (auto& c : u.cycles) {
            scale_inplace(c.x, x_min, x_max, true);
            scale_inplace(c.w, w_min, w_max, true);
        }
    return out;
}

namespace {

nlohmann::json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_scaler(const Scaler& s, const fs::path& file) {
    nlohmann::json j = {{"format", "hybridhi.scaler/1"},
                        {"x_min", to_json(s.x_min)},
                        {"x_max", to_json(s.x_max)},
                        {"w_min", to_json(s.w_min)},
                        {"w_max", to_json(s.w_max)}};
    std::ofstream(file) << j.dump(2) << '\n';
}

Scaler load_scaler(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open scaler file " + file.string());
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", "") != "hybridhi.scaler/1") throw DataError("unsupported scaler format in " + file.string());
    Scaler s;
    s.x_min = vec_from_json(j.at("x_min"));
    s.x_max = vec_from_json(j.at("x_max"));
    s.w_min = vec_from_json(j.at("w_min"));
    s.w_max = vec_from_json(j.at("w_max"));
    return s;
}

FleetDataset downsample(const FleetDataset& fleet, int factor) {
    if (factor < 1) throw ConfigError("downsample: factor must be >= 1");
    if (factor == 1) return fleet;
    FleetDataset out = fleet;
    for (auto& u : out.units)
        for (auto& c : u.cycles) {
            const Eigen::Index kept = (c.x.rows() + factor - 1) / factor;
            RowMatrix x(kept, c.x.cols()), w(kept, c.w.cols());
            for (Eigen::Index r = 0; r < kept; ++r) {
                x.row(r) = c.x.row(r * factor);
                w.row(r) = c.w.row(r * factor);
            }
            c.x = std::move(x);
            c.w = std::move(w);
        }
    return out;
}

WindowSet WindowSet::subset(std::span<const std::size_t> indices) const {
    WindowSet out;
    out.length = length;
    out.n_x = n_x;
    out.n_w = n_w;
    const std::size_t block = channels() * length;
    out.values.reserve(indices.size() * block);
    out.masks.reserve(indices.size() * length);
    for (std::size_t i : indices) {
        out.values.insert(out.values.end(), values.begin() + static_cast<long>(i * block),
                          values.begin() + static_cast<long>((i + 1) * block));
        out.masks.insert(out.masks.end(), masks.begin() + static_cast<long>(i * length),
                         masks.begin() + static_cast<long>((i + 1) * length));
        out.meta.push_back(meta[i]);
    }
    return out;
}

namespace {

void copy_rows(const CycleRecord& c, Eigen::Index row, Channels ch, std::vector<double>& dst) {
    if (ch != Channels::w)
        for (Eigen::Index j = 0; j < c.x.cols(); ++j) dst.push_back(c.x(row, j));
    if (ch != Channels::x)
        for (Eigen::Index j = 0; j < c.w.cols(); ++j) dst.push_back(c.w(row, j));
}

void init_layout(WindowSet& ws, const FleetDataset& fleet, Channels ch) {
    ws.n_x = ch == Channels::w ? 0 : fleet.n_sensors;
    ws.n_w = ch == Channels::x ? 0 : fleet.n_conditions;
}

}  // namespace

WindowSet window_sliding(const FleetDataset& fleet, std::size_t length, std::size_t stride, Channels channels) {
    if (length < 1 || stride < 1) throw ConfigError("window_sliding: length and stride must be >= 1");
    WindowSet ws;
    ws.length = length;
    init_layout(ws, fleet, channels);
    const std::size_t nc = ws.channels();
    for (const auto& u : fleet.units) {
        // Row-major copy of the unit's rows plus the cycle of each row.
        std::vector<double> rows;
        std::vector<int> row_cycle;
        for (const auto& c : u.cycles)
            for (Eigen::Index r = 0; r < c.x.rows(); ++r) {
                copy_rows(c, r, channels, rows);
                row_cycle.push_back(c.t);
            }
        const std::size_t n_rows = row_cycle.size();
        if (n_rows < length) {
            ws.skipped.push_back({"short_unit", "unit " + std::to_string(u.id) + " has " + std::to_string(n_rows) +
                                                    " rows, fewer than window length " + std::to_string(length)});
            continue;
        }
        for (std::size_t start = 0; start + length <= n_rows; start += stride) {
            for (std::size_t c = 0; c < nc; ++c)
                for (std::size_t s = 0; s < length; ++s) ws.values.push_back(rows[(start + s) * nc + c]);
            ws.masks.insert(ws.masks.end(), length, 1);
            ws.meta.push_back({u.id, row_cycle[start + length - 1], row_cycle[start], static_cast<int>(length)});
        }
    }
    return ws;
}

WindowSet window_per_cycle(const FleetDataset& fleet, Channels channels, std::size_t length) {
    if (fleet.units.empty()) throw DataError("window_per_cycle: fleet is empty");
    std::size_t longest = 0;
    for (const auto& u : fleet.units)
        for (const auto& c : u.cycles) longest = std::max(longest, static_cast<std::size_t>(c.x.rows()));
    if (length == 0) length = longest;
    if (length < longest)
        throw ConfigError("window_per_cycle: length " + std::to_string(length) + " shorter than longest cycle " +
                          std::to_string(longest));
    WindowSet ws;
    ws.length = length;
    init_layout(ws, fleet, channels);
    const std::size_t nc = ws.channels();
    std::vector<double> rows;
    for (const auto& u : fleet.units)
        for (const auto& c : u.cycles) {
            rows.clear();
            for (Eigen::Index r = 0; r < c.x.rows(); ++r) copy_rows(c, r, channels, rows);
            const auto m = static_cast<std::size_t>(c.x.rows());
            for (std::size_t ch = 0; ch < nc; ++ch)
                for (std::size_t s = 0; s < length; ++s) ws.values.push_back(s < m ? rows[s * nc + ch] : 0.0);
            for (std::size_t s = 0; s < length; ++s) ws.masks.push_back(s < m ? 1 : 0);
            ws.meta.push_back({u.id, c.t, c.t, static_cast<int>(m)});
        }
    return ws;
}

double compute_capacity(std::span<const double> current, double dt_seconds) {
    double q = 0.0;
    for (double i : current) q += i * dt_seconds;
    return q / 3600.0;
}

}  // namespace hybridhi::ingest
