#pragma once

#include <json.hpp>
#include <limits>
#include <string>
#include <vector>

namespace dil {

struct ResidualEntry {
    std::string name;
    std::string anchor;  // which construction step the identity belongs to
    double residual = 0.0;
    double tol = 0.0;    // +inf for informational entries
    bool pass = true;
    std::string context;
};

class ResidualLedger {
public:
    /// pass = residual <= tol; a NaN residual never passes.
    void add(std::string name, std::string anchor, double residual, double tol, std::string context = "");
    /// Recorded without a target.
    void add_info(std::string name, std::string anchor, double value, std::string context = "");
    void append(const ResidualLedger& other);

    const std::vector<ResidualEntry>& entries() const { return entries_; }
    bool pass() const;
    /// Largest residual among entries with the given name (0 if none).
    double max_residual(const std::string& name) const;
    const ResidualEntry* worst_failure() const;

    nlohmann::json to_json() const;

private:
    std::vector<ResidualEntry> entries_;
};

}  // namespace dil
