#pragma once

#include <stdexcept>
#include <string>

namespace wkbsplit {

// A runtime guard (blow-up, caustic proximity, gradient blow-up) tripped.
// Sweeps catch this and mark the cell failed instead of aborting.
class GuardTrip : public std::runtime_error {
public:
    GuardTrip(std::string guard, double t, const std::string& detail)
        : std::runtime_error(guard + " guard tripped at t=" + std::to_string(t) +
                             ": " + detail),
          guard_(std::move(guard)),
          t_(t) {}

    const std::string& guard() const { return guard_; }
    double time() const { return t_; }

private:
    std::string guard_;
    double t_;
};

}  // namespace wkbsplit
