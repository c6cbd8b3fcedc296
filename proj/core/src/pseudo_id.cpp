#include "prevent/pseudo_id.hpp"

#include "prevent/errors.hpp"

namespace prevent {

namespace {

char hex_digit(unsigned v) { return v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10); }

unsigned hex_value(char c) {
  if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
  if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
  if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
  throw InvalidInput("bad hex digit in pseudo id");
}

void append_hex(std::string& out, std::uint64_t v) {
  for (int shift = 60; shift >= 0; shift -= 4) {
    out.push_back(hex_digit(static_cast<unsigned>((v >> shift) & 0xf)));
  }
}

}  // namespace

std::string PseudoId::to_hex() const {
  std::string out;
  out.reserve(32);
  append_hex(out, hi);
  append_hex(out, lo);
  return out;
}

PseudoId PseudoId::from_hex(const std::string& hex) {
  if (hex.size() != 32) throw InvalidInput("pseudo id must be 32 hex chars");
  PseudoId id;
  for (int i = 0; i < 16; ++i) id.hi = (id.hi << 4) | hex_value(hex[i]);
  for (int i = 16; i < 32; ++i) id.lo = (id.lo << 4) | hex_value(hex[i]);
  return id;
}

}  // namespace prevent
