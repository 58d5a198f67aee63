#pragma once

// Porter's suffix-stripping stemmer (the classic five-step 1980 algorithm).

#include <cstring>
#include <string>

namespace comet {

namespace porter_detail {

class Stemmer {
 public:
  explicit Stemmer(const std::string& word)
      : b_(word), k_(static_cast<int>(word.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
    step1ab();
    step1c();
    step2();
    step3();
    step4();
    step5();
    return b_.substr(0, k_ + 1);
  }

 private:
  std::string b_;
  int k_;      // index of last character
  int j_ = 0;  // index of last stem character, set by ends()

  bool cons(int i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of vowel-consonant sequences in b_[0..j_].
  int m() const {
    int n = 0, i = 0;
    for (;;) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowelinstem() const {
    for (int i = 0; i <= j_; ++i)
      if (!cons(i)) return true;
    return false;
  }

  bool doublec(int j) const {
    if (j < 1) return false;
    if (b_[j] != b_[j - 1]) return false;
    return cons(j);
  }

  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(const char* s) {
    int len = static_cast<int>(std::strlen(s));
    if (len == 0 || s[len - 1] != b_[k_]) return false;
    if (len > k_ + 1) return false;
    if (b_.compare(k_ - len + 1, len, s) != 0) return false;
    j_ = k_ - len;
    return true;
  }

  void setto(const char* s) {
    int len = static_cast<int>(std::strlen(s));
    b_.replace(j_ + 1, b_.size() - (j_ + 1), s);
    k_ = j_ + len;
  }

  void r(const char* s) {
    if (m() > 0) setto(s);
  }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses"))
        k_ -= 2;
      else if (ends("ies"))
        setto("i");
      else if (b_[k_ - 1] != 's')
        --k_;
    }
    if (ends("eed")) {
      if (m() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowelinstem()) {
      k_ = j_;
      if (ends("at"))
        setto("ate");
      else if (ends("bl"))
        setto("ble");
      else if (ends("iz"))
        setto("ize");
      else if (doublec(k_)) {
        --k_;
        char ch = b_[k_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else if (m() == 1 && cvc(k_)) {
        setto("e");
      }
    }
  }

  void step1c() {
    if (ends("y") && vowelinstem()) b_[k_] = 'i';
  }

  void step2() {
    if (k_ < 1) return;
    switch (b_[k_ - 1]) {
      case 'a':
        if (ends("ational")) { r("ate"); break; }
        if (ends("tional")) { r("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { r("ence"); break; }
        if (ends("anci")) { r("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { r("ize"); break; }
        break;
      case 'l':
        if (ends("abli")) { r("able"); break; }
        if (ends("alli")) { r("al"); break; }
        if (ends("entli")) { r("ent"); break; }
        if (ends("eli")) { r("e"); break; }
        if (ends("ousli")) { r("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { r("ize"); break; }
        if (ends("ation")) { r("ate"); break; }
        if (ends("ator")) { r("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { r("al"); break; }
        if (ends("iveness")) { r("ive"); break; }
        if (ends("fulness")) { r("ful"); break; }
        if (ends("ousness")) { r("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { r("al"); break; }
        if (ends("iviti")) { r("ive"); break; }
        if (ends("biliti")) { r("ble"); break; }
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_[k_]) {
      case 'e':
        if (ends("icate")) { r("ic"); break; }
        if (ends("ative")) { r(""); break; }
        if (ends("alize")) { r("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { r("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { r("ic"); break; }
        if (ends("ful")) { r(""); break; }
        break;
      case 's':
        if (ends("ness")) { r(""); break; }
        break;
      default:
        break;
    }
  }

  void step4() {
    if (k_ < 1) return;
    bool hit = false;
    switch (b_[k_ - 1]) {
      case 'a': hit = ends("al"); break;
      case 'c': hit = ends("ance") || ends("ence"); break;
      case 'e': hit = ends("er"); break;
      case 'i': hit = ends("ic"); break;
      case 'l': hit = ends("able") || ends("ible"); break;
      case 'n':
        hit = ends("ant") || ends("ement") || ends("ment") || ends("ent");
        break;
      case 'o':
        if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't'))
          hit = true;
        else
          hit = ends("ou");
        break;
      case 's': hit = ends("ism"); break;
      case 't': hit = ends("ate") || ends("iti"); break;
      case 'u': hit = ends("ous"); break;
      case 'v': hit = ends("ive"); break;
      case 'z': hit = ends("ize"); break;
      default: break;
    }
    if (hit && m() > 1) k_ = j_;
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[k_] == 'l' && doublec(k_) && m() > 1) --k_;
  }
};

}  // namespace porter_detail

// Stems a lowercase word. Inputs with characters outside a-z are returned
// unchanged, as are words of length <= 2.
inline std::string porter_stem(const std::string& word) {
  if (word.size() <= 2) return word;
  for (char c : word)
    if (c < 'a' || c > 'z') return word;
  return porter_detail::Stemmer(word).run();
}

}  // namespace comet
