#include "dil/report.hpp"

#include <cmath>

namespace dil {

void ResidualLedger::add(std::string name, std::string anchor, double residual, double tol, std::string context) {
    bool ok = !std::isnan(residual) && residual <= tol;
    entries_.push_back({std::move(name), std::move(anchor), residual, tol, ok, std::move(context)});
}

void ResidualLedger::add_info(std::string name, std::string anchor, double value, std::string context) {
    entries_.push_back({std::move(name), std::move(anchor), value, std::numeric_limits<double>::infinity(), true,
                        std::move(context)});
}

void ResidualLedger::append(const ResidualLedger& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

bool ResidualLedger::pass() const {
    for (const auto& e : entries_)
        if (!e.pass) return false;
    return true;
}

double ResidualLedger::max_residual(const std::string& name) const {
    double m = 0.0;
    for (const auto& e : entries_)
        if (e.name == name) m = std::max(m, e.residual);
    return m;
}

const ResidualEntry* ResidualLedger::worst_failure() const {
    const ResidualEntry* w = nullptr;
    for (const auto& e : entries_)
        if (!e.pass && (!w || e.residual / e.tol > w->residual / w->tol)) w = &e;
    return w;
}

nlohmann::json ResidualLedger::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries_) {
        nlohmann::json j{{"name", e.name}, {"anchor", e.anchor}, {"pass", e.pass}, {"context", e.context}};
        j["residual"] = std::isfinite(e.residual) ? nlohmann::json(e.residual) : nlohmann::json(nullptr);
        j["tol"] = std::isfinite(e.tol) ? nlohmann::json(e.tol) : nlohmann::json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace dil
