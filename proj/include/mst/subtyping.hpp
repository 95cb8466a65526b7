#pragma once

#include <optional>

#include "mst/syntax.hpp"

namespace mst {

bool subtype_session(const Session& a, const Session& b);
bool subtype_value(const ValueType& a, const ValueType& b);
bool subtype_field(const FieldTyping& a, const FieldTyping& b);

bool equivalent(const Session& a, const Session& b);
bool equivalent(const ValueType& a, const ValueType& b);
bool equivalent(const FieldTyping& a, const FieldTyping& b);

// Least upper bounds; throw Error("JoinUndefined") where no join exists.
Session join_session(const Session& a, const Session& b);
ValueType join_value(const ValueType& a, const ValueType& b);
FieldTyping join_field(const FieldTyping& a, const FieldTyping& b);
// ⋁ over the cases of a variant field typing (a record passes through)
FieldTyping collapse(const FieldTyping& f);

// enum intersection or identical types
std::optional<ValueType> meet_param(const ValueType& a, const ValueType& b);

}  // namespace mst
