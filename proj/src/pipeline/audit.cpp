#include "staug/pipeline/audit.hpp"

namespace staug::pipeline {

void LeakageAudit::record(std::string stage, std::size_t seed_index, int fold, std::vector<std::size_t> rows)
{
    std::lock_guard lock(mu_);
    entries_.push_back({std::move(stage), seed_index, fold, std::move(rows)});
}

std::vector<AuditEntry> LeakageAudit::entries() const
{
    std::lock_guard lock(mu_);
    return entries_;
}

std::vector<std::string> LeakageAudit::violations(const CvPlan& plan) const
{
    std::vector<std::string> out;
    for (const auto& e : entries()) {
        std::size_t leaked = 0;
        for (auto r : e.rows) {
            if (plan.assignment.at(e.seed_index).at(r) == e.fold) {
                ++leaked;
            }
        }
        if (leaked > 0) {
            out.push_back(e.stage + " seed#" + std::to_string(e.seed_index) + " fold " + std::to_string(e.fold) +
                          ": " + std::to_string(leaked) + " held-out rows");
        }
    }
    return out;
}

} // namespace staug::pipeline
