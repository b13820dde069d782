#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include "monocard/plan_model.hpp"

namespace monocard {

struct Pass {
    friend bool operator==(const Pass&, const Pass&) = default;
};

struct Violation {
    double originalEstimate = 0;
    double restrictedEstimate = 0;
    double margin = 0;  // restricted - original
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct Incomparable {
    std::size_t distance = 0;
    friend bool operator==(const Incomparable&, const Incomparable&) = default;
};

using Verdict = std::variant<Pass, Violation, Incomparable>;

struct CheckOptions {
    double epsilon = 0;
    std::size_t similarityThreshold = 1;
};

/// Compares root estimates of the original plan and the restricted plan.
/// Throws MissingEstimate when either root lacks an estimate.
Verdict checkPair(const PlanNode& planQ, const PlanNode& planQPrime, const CheckOptions& options = {});

std::string verdictName(const Verdict& v);
/// One-line description, e.g. "Violation{20, 60, 40}".
std::string describe(const Verdict& v);

}  // namespace monocard
