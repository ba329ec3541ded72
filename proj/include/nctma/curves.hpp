#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace nctma {

// Token-bucket arrival curve: alpha(d) = rate*d + burst for d > 0, 0 at d <= 0.
// The jump at the origin matters for the closed forms below.
struct TokenBucket {
    double rate = 0.0;   // data units per time unit, >= 0
    double burst = 0.0;  // data units, >= 0

    double value(double d) const { return d > 0.0 ? rate * d + burst : 0.0; }

    bool operator==(const TokenBucket&) const = default;
};

// Rate-latency service curve: beta(d) = rate * max(0, d - latency).
struct RateLatency {
    double rate = 0.0;     // > 0
    double latency = 0.0;  // time units, >= 0

    double value(double d) const { return rate * std::max(0.0, d - latency); }

    bool operator==(const RateLatency&) const = default;
};

// End-to-end delay bound: finite non-negative, or unbounded.
class Delay {
public:
    Delay() : value_(0.0) {}
    explicit Delay(double v) : value_(v) {}

    static Delay unbounded() { return Delay(std::numeric_limits<double>::infinity()); }

    bool isUnbounded() const { return std::isinf(value_); }
    bool isFinite() const { return !isUnbounded(); }
    double value() const { return value_; }

    bool operator<(const Delay& o) const { return value_ < o.value_; }
    bool operator==(const Delay&) const = default;

private:
    double value_;
};

// Min-plus concatenation of two rate-latency curves.
inline RateLatency convolve(const RateLatency& a, const RateLatency& b) {
    return {std::min(a.rate, b.rate), a.latency + b.latency};
}

// Componentwise sum; the aggregate of no flows is the zero curve.
inline TokenBucket aggregate(const std::vector<TokenBucket>& flows) {
    TokenBucket sum;
    for (const auto& f : flows) {
        sum.rate += f.rate;
        sum.burst += f.burst;
    }
    return sum;
}

// Residual service under arbitrary multiplexing, [beta - alpha]^+ refitted as
// a rate-latency curve. Empty (nullopt) when the cross rate reaches the
// server rate: the residual is degenerate and every dependent delay bound is
// unbounded (the "UnstableServer" case).
inline std::optional<RateLatency> leftOverSingle(const RateLatency& server,
                                                 const TokenBucket& cross) {
    if (cross.rate >= server.rate) return std::nullopt;
    const double residualRate = server.rate - cross.rate;
    const double latency =
        server.latency + (cross.burst + cross.rate * server.latency) / residualRate;
    return RateLatency{residualRate, latency};
}

// Min-plus deconvolution bound on a flow's departures after crossing a
// service element. Unstable (nullopt) when the arrival rate exceeds the
// service rate.
inline std::optional<TokenBucket> outputBound(const TokenBucket& arrival,
                                              const RateLatency& service) {
    if (arrival.rate > service.rate) return std::nullopt;
    return TokenBucket{arrival.rate, arrival.burst + arrival.rate * service.latency};
}

// Maximum horizontal distance between arrival and service curves; the delay
// bound. Unbounded is a value here, not an error.
inline Delay horizontalDeviation(const TokenBucket& arrival, const RateLatency& service) {
    if (arrival.rate > service.rate) return Delay::unbounded();
    return Delay(service.latency + arrival.burst / service.rate);
}

}  // namespace nctma
