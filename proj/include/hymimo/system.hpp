// SPDX-License-Identifier: Apache-2.0
//
// hymimo: link-level simulation of hybrid OTFS/OFDM downlink massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HYMIMO_SYSTEM_HPP
#define HYMIMO_SYSTEM_HPP

#include <stdexcept>
#include <vector>

#include "channel.hpp"
#include "frame.hpp"

namespace hymimo {

/// One drop of the system: frame geometry, array size, path count and the
/// per-user profiles (HM users first, then LM users).
struct SystemSpec {
    FrameConfig frame;
    int n_t = 16;
    int p = 3;
    std::vector<UserProfile> users;
    bool integer_doppler = false;

    int K() const { return static_cast<int>(users.size()); }
    int K_h() const {
        int n = 0;
        for (const auto& u : users) n += u.group == Mobility::HM ? 1 : 0;
        return n;
    }
    int K_l() const { return K() - K_h(); }

    void validate() const {
        frame.validate();
        if (n_t < 1) throw std::invalid_argument("SystemSpec: N_t must be >= 1");
        if (p < 1) throw std::invalid_argument("SystemSpec: P must be >= 1");
        if (users.empty()) throw std::invalid_argument("SystemSpec: no users");
        // HM block must precede the LM block
        for (int i = 1; i < K(); ++i)
            if (users[i - 1].group == Mobility::LM && users[i].group == Mobility::HM)
                throw std::invalid_argument("SystemSpec: users must be ordered HM first");
        for (const auto& u : users)
            if (!(u.beta > 0.0)) throw std::invalid_argument("SystemSpec: beta must be > 0");
    }

    /// Fresh small-scale realizations for every user from one RNG stream.
    std::vector<ChannelRealization> draw_realizations(Rng& rng) const {
        std::vector<ChannelRealization> out;
        out.reserve(users.size());
        for (const auto& u : users)
            out.emplace_back(draw_paths(u, p, rng, integer_doppler), u.beta, frame, n_t);
        return out;
    }
};

/// Flat-fading spec used by the figure-style experiments: beta = 1 for all
/// users, default mobility bounds.
inline SystemSpec flat_spec(const FrameConfig& frame, int k_h, int k_l, int n_t, int p = 3) {
    SystemSpec s;
    s.frame = frame;
    s.n_t = n_t;
    s.p = p;
    for (int i = 0; i < k_h + k_l; ++i) {
        UserProfile u;
        u.group = i < k_h ? Mobility::HM : Mobility::LM;
        u.beta = 1.0;
        u.l_max = 3;
        u.k_max = u.group == Mobility::HM ? 5.0 : 3.0;
        s.users.push_back(u);
    }
    return s;
}

}  // namespace hymimo

#endif
