#include "hybridhi/fleet.hpp"

#include "hybridhi/diagnostics.hpp"
#include "hybridhi/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <sstream>

namespace hybridhi {

std::size_t Unit::rows() const {
    std::size_t n = 0;
    for (const auto& c : cycles) n += static_cast<std::size_t>(c.x.rows());
    return n;
}

bool FleetDataset::has_ground_truth() const {
    return !units.empty() &&
           std::all_of(units.begin(), units.end(), [](const Unit& u) { return u.hi_gt.has_value(); });
}

const Unit& FleetDataset::unit(int id) const {
    for (const auto& u : units)
        if (u.id == id) return u;
    throw DataError("unknown unit id " + std::to_string(id));
}

void FleetDataset::validate() const {
    for (const auto& u : units) {
        const std::string name = "unit " + std::to_string(u.id);
        for (std::size_t i = 0; i < u.cycles.size(); ++i) {
            const auto& c = u.cycles[i];
            if (i > 0 && c.t <= u.cycles[i - 1].t)
                throw DataError(name + ": cycle indices not strictly increasing at cycle " + std::to_string(c.t));
            if (c.x.rows() != c.w.rows())
                throw DataError(name + ": X and W row counts differ in cycle " + std::to_string(c.t));
            if (static_cast<std::size_t>(c.x.cols()) != n_sensors ||
                static_cast<std::size_t>(c.w.cols()) != n_conditions)
                throw DataError(name + ": channel count mismatch in cycle " + std::to_string(c.t));
        }
        if (u.hi_gt) {
            if (u.hi_gt->size() != u.cycles.size())
                throw DataError(name + ": ground-truth HI length differs from cycle count");
            for (double h : *u.hi_gt)
                if (!(h >= 0.0 && h <= 1.0)) throw DataError(name + ": ground-truth HI outside [0,1]");
        }
    }
}

FleetDataset select_units(const FleetDataset& fleet, const std::vector<int>& ids) {
    FleetDataset out;
    out.n_sensors = fleet.n_sensors;
    out.n_conditions = fleet.n_conditions;
    for (int id : ids) out.units.push_back(fleet.unit(id));
    return out;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ull;
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ull;
        }
    }
    template <class T>
    void value(const T& v) { bytes(&v, sizeof(T)); }
};

}  // namespace

std::string fingerprint(const FleetDataset& fleet) {
    Fnv1a f;
    f.value(static_cast<std::uint64_t>(fleet.n_sensors));
    f.value(static_cast<std::uint64_t>(fleet.n_conditions));
    for (const auto& u : fleet.units) {
        f.value(u.id);
        f.bytes(u.class_tag.data(), u.class_tag.size());
        for (const auto& c : u.cycles) {
            f.value(c.t);
            f.bytes(c.x.data(), sizeof(double) * static_cast<std::size_t>(c.x.size()));
            f.bytes(c.w.data(), sizeof(double) * static_cast<std::size_t>(c.w.size()));
        }
        if (u.hi_gt) f.bytes(u.hi_gt->data(), sizeof(double) * u.hi_gt->size());
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << f.h;
    return os.str();
}

void emit(const Diagnostics& diags, const std::string& source) {
    for (const auto& d : diags) {
        nlohmann::json rec = {{"level", "warning"}, {"source", source}, {"code", d.code}, {"message", d.message}};
        std::cerr << rec.dump() << '\n';
    }
}

}  // namespace hybridhi
