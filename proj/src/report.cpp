#include "hybridhi/pipeline.hpp"

#include "hybridhi/error.hpp"
#include "hybridhi/kv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hybridhi::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Series {
    std::string name;
    std::vector<double> x, y;
    const char* color;
};

std::string num(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
    constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        o << "<text x=\"" << num(px(xv), 1) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(xv, 1) << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4, 1) << "\" text-anchor=\"end\">" << num(yv, 2) << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
    double ly = T + 6;
    for (const auto& s : series) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.y[i])) o << num(px(s.x[i]), 1) << ',' << num(py(s.y[i]), 1) << ' ';
        o << "\"/>\n";
        o << "<line x1=\"" << W - R - 130 << "\" y1=\"" << ly << "\" x2=\"" << W - R - 110 << "\" y2=\"" << ly
          << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << W - R - 104 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
        ly += 16;
    }
    o << "</svg>\n";
    return o.str();
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << text;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
    std::ifstream in(file);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row(1);
        bool quoted = false;
        for (char c : line) {
            if (c == '"')
                quoted = !quoted;
            else if (c == ',' && !quoted)
                row.emplace_back();
            else
                row.back() += c;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string pm(const json& stat, int digits) {
    if (stat.is_null()) return "-";
    return num(stat.at("mean").get<double>(), digits) + " ± " + num(stat.at("std").get<double>(), digits);
}

std::vector<std::uint64_t> seed_dirs(const fs::path& root) {
    std::vector<std::uint64_t> seeds;
    if (!fs::exists(root)) return seeds;
    for (const auto& e : fs::directory_iterator(root)) {
        const auto name = e.path().filename().string();
        if (e.is_directory() && name.starts_with("seed_") && name.size() > 5 &&
            std::all_of(name.begin() + 5, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            seeds.push_back(std::stoull(name.substr(5)));
    }
    std::sort(seeds.begin(), seeds.end());
    return seeds;
}

const char* kRulNames[][2] = {{"baseline", "none (baseline)"}, {"estimated", "estimated HI"}, {"ground_truth", "ground-truth HI"}};

}  // namespace

void report(const fs::path& out) {
    const Layout lay{out};
    const bool has_metrics = fs::exists(lay.metrics());
    const bool has_rul = fs::exists(lay.rul_report());
    const bool has_causal = fs::exists(lay.causal());
    if (!has_metrics && !has_rul && !has_causal) throw DataError("no artifacts found in " + out.string());

    std::string name = out.filename().string();
    if (fs::exists(lay.config())) name = kv::Document::load(lay.config()).string("name", name);
    fs::create_directories(lay.plots());

    std::ostringstream md;
    md << "# " << name << "\n\n";
    if (fs::exists(lay.dataset_info())) {
        std::ifstream in(lay.dataset_info());
        std::string line;
        while (std::getline(in, line))
            if (!line.starts_with("generator ")) md << "- " << line << "\n";
        md << "\n";
    }

    if (has_metrics) {
        const auto j = read_json(lay.metrics());
        const auto& s = j.at("summary");
        md << "## Health-index quality (test units)\n\n";
        md << "| Method | Mon | Tren | Prog | MutInf | MAPE (%) |\n|---|---|---|---|---|---|\n";
        md << "| " << j.at("label").get<std::string>() << " | " << pm(s.at("mon"), 3) << " | " << pm(s.at("tren"), 3)
           << " | " << pm(s.at("prog"), 3) << " | " << pm(s.at("mutinf"), 3) << " | " << pm(s.at("mape"), 2) << " |\n\n";
        md << "| Seed | Mon | Tren | Prog | MutInf | MAPE (%) |\n|---|---|---|---|---|---|\n";
        for (const auto& r : j.at("runs"))
            md << "| " << r.at("seed").get<std::uint64_t>() << " | " << num(r.at("mon").get<double>()) << " | "
               << num(r.at("tren").get<double>()) << " | " << num(r.at("prog").get<double>()) << " | "
               << num(r.at("mutinf").get<double>()) << " | "
               << (r.at("mape").is_null() ? std::string("-") : num(r.at("mape").get<double>(), 2)) << " |\n";
        md << "\n";
    }

    if (has_rul) {
        const auto j = read_json(lay.rul_report());
        const auto& s = j.at("summary");
        md << "## RUL prediction (test units)\n\n";
        md << "| HI input | MAE | RMSE | MAPE (%) | Avg. improvement (%) |\n|---|---|---|---|---|\n";
        for (const auto& [key, label] : kRulNames) {
            if (!s.contains(key)) continue;
            const auto& v = s.at(key);
            md << "| " << label << " | " << pm(v.at("mae"), 2) << " | " << pm(v.at("rmse"), 2) << " | "
               << pm(v.at("mape"), 2) << " | " << (v.contains("avg_improvement") ? pm(v.at("avg_improvement"), 2) : "-")
               << " |\n";
        }
        md << "\n";
    }

    if (has_causal) {
        const auto rows = read_csv(lay.causal());
        md << "## Causal structure ranking (top 5, rank 0 = best)\n\n| DAG | median rank | mean rank |\n|---|---|---|\n";
        for (std::size_t i = 1; i < rows.size() && i <= 5; ++i)
            if (rows[i].size() >= 3) md << "| " << rows[i][0] << " | " << rows[i][1] << " | " << rows[i][2] << " |\n";
        md << "\n";
    }

    std::map<int, HITrajectory> truth;
    if (fs::exists(lay.truth_test()))
        for (auto& t : read_hi_csv(lay.truth_test())) truth[t.unit] = std::move(t);

    std::vector<std::string> plot_lines;
    for (auto seed : seed_dirs(lay.root)) {
        const auto dir = lay.seed_dir(seed);
        if (fs::exists(dir / "hi_test.csv")) {
            for (const auto& est : read_hi_csv(dir / "hi_test.csv")) {
                std::vector<Series> series{{"estimated HI", est.t, est.h, "#1f77b4"}};
                if (truth.contains(est.unit)) series.push_back({"ground truth", truth[est.unit].t, truth[est.unit].h, "#d62728"});
                const auto file = "hi_seed" + std::to_string(seed) + "_unit" + std::to_string(est.unit) + ".svg";
                write_text(lay.plots() / file,
                           svg_plot("HI, unit " + std::to_string(est.unit) + ", seed " + std::to_string(seed), "cycle", "HI", series));
                plot_lines.push_back("- [" + file + "](plots/" + file + ")");
            }
        }
        if (fs::exists(dir / "loss_history.csv")) {
            const auto rows = read_csv(dir / "loss_history.csv");
            Series total{"total", {}, {}, "#1f77b4"}, mae{"reconstruction", {}, {}, "#2ca02c"}, con{"constraint", {}, {}, "#ff7f0e"};
            for (std::size_t i = 1; i < rows.size(); ++i) {
                if (rows[i].size() < 4) continue;
                const double e = std::stod(rows[i][0]);
                total.x.push_back(e), total.y.push_back(std::stod(rows[i][1]));
                mae.x.push_back(e), mae.y.push_back(std::stod(rows[i][2]));
                con.x.push_back(e), con.y.push_back(std::stod(rows[i][3]));
            }
            const auto file = "loss_seed" + std::to_string(seed) + ".svg";
            write_text(lay.plots() / file, svg_plot("Training loss, seed " + std::to_string(seed), "epoch", "loss", {total, mae, con}));
            plot_lines.push_back("- [" + file + "](plots/" + file + ")");
        }
    }
    if (!plot_lines.empty()) {
        md << "## Plots\n\n";
        for (const auto& l : plot_lines) md << l << "\n";
        md << "\n";
    }
    write_text(lay.report(), md.str());
}

}  // namespace hybridhi::pipeline
