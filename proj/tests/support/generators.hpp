#pragma once

// Random generators for property tests. Header-only, test code only.

#include <cmath>
#include <random>
#include <string>

#include "cls/codec/command.hpp"
#include "cls/codec/sexpr.hpp"

namespace cls::testsupport {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    /// Mix of round values and arbitrary doubles so both short and long
    /// decimal forms are exercised.
    double number(double lo, double hi) {
        double v = 0.0;
        switch (integer(0, 3)) {
            case 0: v = static_cast<double>(integer(static_cast<int>(lo), static_cast<int>(hi) - 1)); break;
            case 1: v = std::round(uniform(lo, hi) * 100.0) / 100.0; break;
            default: v = uniform(lo, hi); break;
        }
        return v >= hi ? lo : v;
    }

    std::string printable(int max_len, bool allow_space = true) {
        std::string s;
        const int n = integer(0, max_len);
        for (int i = 0; i < n; ++i) {
            char c = static_cast<char>(integer(0x20, 0x7e));
            if (!allow_space && (c == ' ' || c == '(' || c == ')' || c == '"')) c = 'x';
            s.push_back(c);
        }
        return s;
    }

    std::string identifier(int max_len) {
        static constexpr char kChars[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-";
        std::string s;
        const int n = integer(1, max_len);
        for (int i = 0; i < n; ++i) s.push_back(kChars[integer(0, static_cast<int>(sizeof kChars) - 2)]);
        return s;
    }

    PlayMode play_mode() {
        const auto kind = static_cast<PlayModeKind>(integer(0, 7));
        PlayMode m{kind, std::nullopt};
        if (kind_has_side(kind)) m.side = coin() ? Side::Left : Side::Right;
        return m;
    }

    codec::Command command() {
        using namespace codec;
        switch (integer(0, 10)) {
            case 0: return InitCmd{coin() ? identifier(12) : std::string{}, integer(1, 18), coin()};
            case 1: return MoveCmd{number(-60, 60), number(-40, 40)};
            case 2: return DashCmd{number(-100, 100), number(-180, 180)};
            case 3: return TurnCmd{number(-180, 180)};
            case 4: return KickCmd{number(-100, 100), number(-180, 180)};
            case 5: return TurnNeckCmd{number(-180, 180)};
            case 6: return SayCmd{printable(40)};
            case 7: {
                TrainerMoveCmd m;
                m.x = number(-60, 60);
                m.y = number(-40, 40);
                if (coin()) {
                    m.target = BallTarget{};
                    if (coin()) {
                        m.vx = number(-3, 3);
                        m.vy = number(-3, 3);
                    }
                } else {
                    m.target = PlayerTarget{coin() ? Side::Left : Side::Right, integer(1, 11)};
                    if (coin()) m.dir = number(-180, 180);
                }
                return m;
            }
            case 8: return ChangeModeCmd{play_mode()};
            case 9: return RecoverCmd{};
            default: return ByeCmd{};
        }
    }

    /// Random canonical S-expression: bare atoms are non-empty delimiter-free
    /// text, quoted atoms arbitrary printable text.
    codec::SExpr sexpr(int depth = 0) {
        using codec::SExpr;
        if (depth > 4 || integer(0, 2) == 0) {
            if (coin()) return SExpr::atom(printable(10), true);
            return SExpr::atom(identifier(8), false);
        }
        SExpr::List l;
        const int n = integer(0, 5);
        for (int i = 0; i < n; ++i) l.push_back(sexpr(depth + 1));
        return SExpr::list(std::move(l));
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace cls::testsupport
