#pragma once

#include <cstdint>

namespace dualpass {

/// Injectable time source. Link-token TTLs and lock expiry are the only
/// time-dependent behaviors; tests drive them through MockClock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now() const = 0; // unix seconds
};

class SystemClock final : public Clock {
public:
    std::int64_t now() const override;
};

class MockClock final : public Clock {
public:
    explicit MockClock(std::int64_t start = 0) : now_(start) {}

    std::int64_t now() const override { return now_; }
    void advance(std::int64_t seconds) { now_ += seconds; }
    void set(std::int64_t t) { now_ = t; }

private:
    std::int64_t now_;
};

} // namespace dualpass
