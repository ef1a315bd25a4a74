#pragma once

#include <map>
#include <memory>

#include "rwpm/walk.hpp"

namespace fx
{
inline const rwpm::TransitionEngine& srw(int d)
{
    static std::map<int, std::unique_ptr<rwpm::TransitionEngine>> cache;
    auto& p = cache[d];
    if (!p)
        p = std::make_unique<rwpm::TransitionEngine>(rwpm::make_srw_kernel(d));
    return *p;
}

inline const rwpm::TransitionEngine& stable(double gamma)
{
    static std::map<double, std::unique_ptr<rwpm::TransitionEngine>> cache;
    auto& p = cache[gamma];
    if (!p)
        p = std::make_unique<rwpm::TransitionEngine>(rwpm::make_stable_kernel(gamma));
    return *p;
}
}  // namespace fx
