#pragma once

#include "mst/syntax.hpp"

namespace mst {

Channel dual(const Channel& c);

// ⟦Σ⟧: the class session type of an endpoint following Σ
Session translate_channel(const Channel& c);
// ⟦⟨Σ⟩⟧: access point objects; accept yields ⟦Σ⟧, request yields ⟦Σ̄⟧
Session translate_access(const Channel& c);

}  // namespace mst
