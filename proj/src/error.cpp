#include "mfmine/error.hpp"

namespace mfmine {

namespace {

std::string describe_cycle(const std::vector<std::string>& cycle) {
    std::string msg = "cyclic test dependency: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i > 0) {
            msg += " -> ";
        }
        msg += cycle[i];
    }
    return msg;
}

}  // namespace

CyclicDependency::CyclicDependency(std::vector<std::string> cycle)
    : Error(describe_cycle(cycle)), cycle_(std::move(cycle)) {}

}  // namespace mfmine
