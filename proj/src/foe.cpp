#include "ptsc/foe.hpp"

#include <limits>

namespace ptsc {

FoTerm foe(const Expr& e) {
  auto enc = [](FoSym s, std::vector<FoTerm> args) { return FoTerm{s, std::move(args)}; };
  switch (e.kind()) {
    case Kind::Sort:
    case Kind::Nil:
      return {};
    case Kind::Pi:
    case Kind::Lam:
    case Kind::Cons:
    case Kind::Concat:
      return enc(FoSym::Deux, {foe(e[0]), foe(e[1])});
    case Kind::VarApp:
      return enc(FoSym::Un, {foe(e.args())});
    case Kind::App:
      return enc(FoSym::CutS, {foe(e.head()), foe(e.args())});
    case Kind::Cut:
    case Kind::CutL:
      // The annotation is not encoded.
      return enc(FoSym::Sub, {foe(e.payload()), foe(e.body())});
    case Kind::Meta:
    case Kind::MetaList: {
      std::vector<FoTerm> args;
      for (const Expr& m : e.children()) args.push_back(foe(m));
      return enc(FoSym::Tuple, std::move(args));
    }
  }
  return {};
}

namespace {

std::size_t rank(const FoTerm& t) {
  constexpr std::size_t top = std::numeric_limits<std::size_t>::max();
  switch (t.sym) {
    case FoSym::Bullet: return 0;
    case FoSym::Un: return 1;
    case FoSym::Deux: return 2;
    case FoSym::Tuple: return 3 + t.args.size();
    case FoSym::CutS: return top - 1;
    case FoSym::Sub: return top;
  }
  return 0;
}

bool dominates_all(const FoTerm& s, const FoTerm& t) {
  for (const FoTerm& tj : t.args)
    if (!lpo_gt(s, tj)) return false;
  return true;
}

}  // namespace

bool lpo_gt(const FoTerm& s, const FoTerm& t) {
  for (const FoTerm& si : s.args)
    if (si == t || lpo_gt(si, t)) return true;
  std::size_t rs = rank(s), rt = rank(t);
  if (rs > rt) return dominates_all(s, t);
  if (rs < rt) return false;
  // Same symbol, hence same arity: lexicographic comparison.
  for (std::size_t i = 0; i < s.args.size(); ++i) {
    if (s.args[i] == t.args[i]) continue;
    return lpo_gt(s.args[i], t.args[i]) && dominates_all(s, t);
  }
  return false;
}

std::string to_string(const FoTerm& t) {
  std::string head;
  switch (t.sym) {
    case FoSym::Bullet: return ".";
    case FoSym::Un: head = "un"; break;
    case FoSym::Deux: head = "deux"; break;
    case FoSym::Tuple: head = "tuple" + std::to_string(t.args.size()); break;
    case FoSym::CutS: head = "cut"; break;
    case FoSym::Sub: head = "sub"; break;
  }
  head += '(';
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) head += ',';
    head += to_string(t.args[i]);
  }
  return head + ')';
}

}  // namespace ptsc
