#pragma once

#include <string>

#include "mst/syntax.hpp"

namespace mst {

std::string render(const Session& s);
std::string render(const ValueType& t);
std::string render(const FieldTyping& f);
std::string render(const Channel& c);
std::string render(const ExprPtr& e);
std::string render(const Value& v);
std::string render(const Heap& h);

}  // namespace mst
