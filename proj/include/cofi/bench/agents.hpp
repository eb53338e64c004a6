#pragma once

#include <random>
#include <string>
#include <vector>

#include "cofi/core/error.hpp"
#include "cofi/core/rng.hpp"
#include "cofi/core/types.hpp"
#include "cofi/logic/field.hpp"

namespace cofi::bench {

enum class Compliance { Compliant, Incompliant, Mixed };

inline const char* to_string(Compliance c) {
    switch (c) {
        case Compliance::Compliant: return "compliant";
        case Compliance::Incompliant: return "incompliant";
        case Compliance::Mixed: return "mixed";
    }
    return "?";
}

inline Compliance compliance_from_string(const std::string& s) {
    if (s == "compliant") return Compliance::Compliant;
    if (s == "incompliant") return Compliance::Incompliant;
    if (s == "mixed") return Compliance::Mixed;
    throw ConfigError("unknown compliance mode '" + s + "'");
}

struct AgentState {
    Vec2 p = Vec2::Zero();
    Vec2 v = Vec2::Zero();
};

struct AgentTrack {
    std::vector<double> t;
    std::vector<Vec2> p;
    std::vector<Vec2> v;
};

inline constexpr int kMaxConsecutiveRejections = 1000;

/// Constant-velocity motion with an acceleration kick a ~ N(0, sigma_a^2 I)
/// every step. A kick is kept with probability equal to the field value at
/// the resulting position (compliant) or one minus it (incompliant);
/// rejected kicks are redrawn. With a positive `lookahead_s` the field is
/// read where the new position and velocity lead after that many seconds.
inline AgentTrack simulate_agent(const logic::ConstitutionField& field, const AgentState& start, int steps,
                                 double dt, double sigma_a, Compliance mode, Rng& rng, double lookahead_s = 0.0) {
    if (mode == Compliance::Mixed) throw ArgumentError("an individual agent is either compliant or incompliant");
    if (steps < 1) throw ArgumentError("agent needs at least one step");
    if (!(dt > 0.0) || !(sigma_a >= 0.0) || !(lookahead_s >= 0.0))
        throw ArgumentError("agent dt must be positive, sigma_a and lookahead >= 0");
    if (!field.grid.bbox.contains(start.p)) throw OutOfBoundsError("agent start lies outside the field");
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u;
    AgentTrack tr;
    AgentState s = start;
    tr.t.push_back(0.0);
    tr.p.push_back(s.p);
    tr.v.push_back(s.v);
    for (int k = 1; k < steps; ++k) {
        int rejections = 0;
        for (;;) {
            const double ax = g(rng), ay = g(rng);
            const Vec2 a = Vec2(ax, ay) * sigma_a;
            const Vec2 p = s.p + s.v * dt + 0.5 * a * dt * dt;
            const Vec2 v = s.v + a * dt;
            const double f = field.at_clamped(p + v * lookahead_s);
            const double accept = mode == Compliance::Compliant ? f : 1.0 - f;
            if (u(rng) < accept) {
                s.p = p;
                s.v = v;
                break;
            }
            if (++rejections >= kMaxConsecutiveRejections)
                throw StuckAgentError("agent rejected " + std::to_string(rejections) + " consecutive kicks at step " +
                                      std::to_string(k));
        }
        tr.t.push_back(k * dt);
        tr.p.push_back(s.p);
        tr.v.push_back(s.v);
    }
    return tr;
}

}  // namespace cofi::bench
