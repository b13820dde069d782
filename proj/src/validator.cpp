#include "monocard/validator.hpp"

#include <charconv>

#include "monocard/errors.hpp"
#include "monocard/similarity.hpp"

namespace monocard {

Verdict checkPair(const PlanNode& planQ, const PlanNode& planQPrime, const CheckOptions& options) {
    if (options.epsilon < 0) throw ConfigError("epsilon must be >= 0");
    const double original = rootEstimate(planQ);
    const double restricted = rootEstimate(planQPrime);
    const auto distance = editDistance(flatten(planQ), flatten(planQPrime));
    if (distance > options.similarityThreshold) return Incomparable{distance};
    if (restricted > original + options.epsilon) return Violation{original, restricted, restricted - original};
    return Pass{};
}

std::string verdictName(const Verdict& v) {
    if (std::holds_alternative<Pass>(v)) return "Pass";
    if (std::holds_alternative<Violation>(v)) return "Violation";
    return "Incomparable";
}

namespace {

std::string number(double d) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, p);
}

}  // namespace

std::string describe(const Verdict& v) {
    if (const auto* x = std::get_if<Violation>(&v)) {
        return "Violation{" + number(x->originalEstimate) + ", " + number(x->restrictedEstimate) + ", " +
               number(x->margin) + "}";
    }
    if (const auto* x = std::get_if<Incomparable>(&v)) return "Incomparable{" + std::to_string(x->distance) + "}";
    return "Pass";
}

}  // namespace monocard
