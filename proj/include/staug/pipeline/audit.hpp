#pragma once

#include "staug/pipeline/cv_plan.hpp"

#include <cstddef>
#include <mutex>
#include <string>
#include <vector>

namespace staug::pipeline {

// Data-flow tags: every consumer of experimental labels (teacher fit, GT
// training, GT early-stopping split) records the row ids whose labels it
// actually read, keyed by the (seed, fold) it serves.
struct AuditEntry {
    std::string stage;
    std::size_t seed_index = 0;
    int fold = 0;
    std::vector<std::size_t> rows;
};

class LeakageAudit {
public:
    LeakageAudit() = default;
    LeakageAudit(const LeakageAudit& o) : entries_(o.entries()) {}
    LeakageAudit& operator=(const LeakageAudit& o)
    {
        if (this != &o) {
            auto copy = o.entries();
            std::lock_guard lock(mu_);
            entries_ = std::move(copy);
        }
        return *this;
    }

    void record(std::string stage, std::size_t seed_index, int fold, std::vector<std::size_t> rows);
    std::vector<AuditEntry> entries() const;
    // One message per entry that read a label from its own held-out fold.
    std::vector<std::string> violations(const CvPlan& plan) const;

private:
    mutable std::mutex mu_;
    std::vector<AuditEntry> entries_;
};

} // namespace staug::pipeline
