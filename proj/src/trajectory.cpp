#include "hybridhi/trajectory.hpp"

#include "hybridhi/error.hpp"
#include "hybridhi/fleet.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace hybridhi {

void write_hi_csv(const std::vector<HITrajectory>& trajectories, const std::filesystem::path& file,
                  const char* column) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "unit,cycle," << column << '\n';
    char buf[64];
    for (const auto& tr : trajectories)
        for (std::size_t i = 0; i < tr.h.size(); ++i) {
            const auto r = std::to_chars(buf, buf + sizeof(buf), tr.h[i]);
            out << tr.unit << ',' << tr.t[i] << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf)) << '\n';
        }
}

std::vector<HITrajectory> read_hi_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    std::string line;
    std::getline(in, line);
    std::map<int, HITrajectory> by_unit;
    std::vector<int> order;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
            throw LoadError(file.filename().string(), row, "expected unit,cycle,value");
        const int unit = std::stoi(a);
        auto [it, inserted] = by_unit.try_emplace(unit);
        if (inserted) {
            it->second.unit = unit;
            order.push_back(unit);
        }
        it->second.t.push_back(std::stod(b));
        it->second.h.push_back(std::stod(c));
    }
    std::vector<HITrajectory> out;
    for (int u : order) out.push_back(std::move(by_unit[u]));
    return out;
}

std::vector<HITrajectory> ground_truth_trajectories(const FleetDataset& fleet) {
    std::vector<HITrajectory> out;
    for (const auto& u : fleet.units) {
        if (!u.hi_gt) continue;
        HITrajectory tr;
        tr.unit = u.id;
        for (const auto& c : u.cycles) tr.t.push_back(c.t);
        tr.h = *u.hi_gt;
        out.push_back(std::move(tr));
    }
    return out;
}

}  // namespace hybridhi
