#include "cohsim/types.hpp"

namespace cohsim {

const char* to_string(CoherenceState s) {
  switch (s) {
    case CoherenceState::M: return "M";
    case CoherenceState::O: return "O";
    case CoherenceState::E: return "E";
    case CoherenceState::S: return "S";
    case CoherenceState::I: return "I";
  }
  return "?";
}

const char* to_string(Op op) {
  return op == Op::Load ? "L" : "S";
}

const char* to_string(TxnKind k) {
  switch (k) {
    case TxnKind::ReadReq: return "ReadReq";
    case TxnKind::InvalidateReq: return "InvalidateReq";
    case TxnKind::UpdateReq: return "UpdateReq";
  }
  return "?";
}

}  // namespace cohsim
