#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lorlab {

// Extended real with explicit +/- infinity sentinels.  Public interfaces
// never hand out raw non-finite doubles.
class XReal {
  public:
    enum class Tag { Finite, NegInf, PosInf };

    XReal() : value_(0.0), tag_(Tag::Finite) {}
    explicit XReal(double v) : value_(v), tag_(Tag::Finite) {}

    static XReal neg_inf() { XReal r; r.tag_ = Tag::NegInf; return r; }
    static XReal pos_inf() { XReal r; r.tag_ = Tag::PosInf; return r; }

    bool finite() const { return tag_ == Tag::Finite; }
    bool is_neg_inf() const { return tag_ == Tag::NegInf; }
    bool is_pos_inf() const { return tag_ == Tag::PosInf; }
    Tag tag() const { return tag_; }

    // Finite value; calling this on a sentinel is a bug.
    double value() const {
        if (!finite()) throw std::logic_error("XReal: value() on non-finite");
        return value_;
    }

    // Lossy conversion for arithmetic that tolerates infinities.
    double as_double() const {
        switch (tag_) {
            case Tag::NegInf: return -std::numeric_limits<double>::infinity();
            case Tag::PosInf: return std::numeric_limits<double>::infinity();
            default: return value_;
        }
    }

    friend bool operator==(const XReal& a, const XReal& b) {
        if (a.tag_ != b.tag_) return false;
        return a.tag_ != Tag::Finite || a.value_ == b.value_;
    }
    friend bool operator<(const XReal& a, const XReal& b) {
        return a.as_double() < b.as_double();
    }

    friend std::ostream& operator<<(std::ostream& os, const XReal& x) {
        switch (x.tag_) {
            case Tag::NegInf: return os << "-inf";
            case Tag::PosInf: return os << "+inf";
            default: return os << x.value_;
        }
    }

  private:
    double value_;
    Tag tag_;
};

}  // namespace lorlab
