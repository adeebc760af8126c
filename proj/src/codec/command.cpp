#include "cls/codec/command.hpp"

#include <cmath>

#include "detail.hpp"

namespace cls::codec {

using namespace detail;

namespace {

void check_range(std::string_view name, double v, double lo, double hi, bool hi_inclusive) {
    const bool ok = std::isfinite(v) && v >= lo && (hi_inclusive ? v <= hi : v < hi);
    if (!ok) throw CodecError(ErrorKind::OutOfRangeField, std::string(name) + " = " + format_exact(v));
}

void check_power(double v) { check_range("power", v, kMinPower, kMaxPower, true); }
void check_angle(std::string_view name, double v) { check_range(name, v, kMinMoment, kMaxMoment, false); }
void check_finite(std::string_view name, double v) {
    if (!std::isfinite(v)) throw CodecError(ErrorKind::OutOfRangeField, std::string(name) + " is not finite");
}

void check_text(std::string_view name, const std::string& s) {
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u >= 0x7f)
            throw CodecError(ErrorKind::OutOfRangeField, std::string(name) + " contains a non-printable byte");
    }
}

SExpr sym(std::string_view s) { return SExpr::atom(std::string(s)); }
SExpr num(double v) { return SExpr::atom(format_exact(v)); }

Command decode_move(const SExpr::List& l) {
    if (l.size() >= 2 && l[1].is_list()) {
        const auto& target = l[1].as_list();
        const auto head = head_of(target);
        TrainerMoveCmd m;
        if (head == "ball") {
            expect_size(target, 1, "ball target");
            if (l.size() != 4 && l.size() != 6)
                throw CodecError(ErrorKind::FieldCountMismatch, "trainer ball move");
            m.target = BallTarget{};
            if (l.size() == 6) {
                m.vx = as_number(l[4], "vx");
                m.vy = as_number(l[5], "vy");
            }
        } else if (head == "player") {
            expect_size(target, 3, "player target");
            auto side = side_from_char(as_text(target[1], "player side"));
            if (!side) throw CodecError(ErrorKind::OutOfRangeField, "player side");
            m.target = PlayerTarget{*side, as_int(target[2], "player unum")};
            if (l.size() != 4 && l.size() != 5)
                throw CodecError(ErrorKind::FieldCountMismatch, "trainer player move");
            if (l.size() == 5) m.dir = as_number(l[4], "dir");
        } else {
            throw CodecError(ErrorKind::FieldCountMismatch, "move target");
        }
        m.x = as_number(l[2], "x");
        m.y = as_number(l[3], "y");
        return m;
    }
    expect_size(l, 3, "move");
    return MoveCmd{as_number(l[1], "x"), as_number(l[2], "y")};
}

Command decode_init(const SExpr::List& l) {
    InitCmd c;
    std::size_t i = 1;
    if (i < l.size() && l[i].is_atom()) c.team = l[i++].as_atom().text;
    bool have_version = false;
    for (; i < l.size(); ++i) {
        const auto& item = as_list(l[i], "init option");
        const auto head = head_of(item);
        if (head == "version") {
            expect_size(item, 2, "version");
            c.version = as_int(item[1], "version");
            have_version = true;
        } else if (head == "goalie") {
            expect_size(item, 1, "goalie");
            c.goalie = true;
        } else {
            throw CodecError(ErrorKind::FieldCountMismatch, "unknown init option '" + std::string(head) + "'");
        }
    }
    if (!have_version) throw CodecError(ErrorKind::FieldCountMismatch, "init without version");
    return c;
}

}  // namespace

bool is_body_command(const Command& c) {
    return std::holds_alternative<DashCmd>(c) || std::holds_alternative<TurnCmd>(c) ||
           std::holds_alternative<KickCmd>(c) || std::holds_alternative<MoveCmd>(c);
}

std::string_view command_name(const Command& c) {
    static constexpr std::string_view kNames[] = {"init",      "move", "dash",        "turn",    "kick", "turn_neck",
                                                  "say",       "move", "change_mode", "recover", "bye"};
    return kNames[c.index()];
}

void validate_command(const Command& c) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, InitCmd>) {
                check_text("team", v.team);
                if (v.version < 1) throw CodecError(ErrorKind::OutOfRangeField, "version");
            } else if constexpr (std::is_same_v<T, MoveCmd>) {
                check_finite("x", v.x);
                check_finite("y", v.y);
            } else if constexpr (std::is_same_v<T, DashCmd> || std::is_same_v<T, KickCmd>) {
                check_power(v.power);
                check_angle("dir", v.dir);
            } else if constexpr (std::is_same_v<T, TurnCmd> || std::is_same_v<T, TurnNeckCmd>) {
                check_angle("moment", v.moment);
            } else if constexpr (std::is_same_v<T, SayCmd>) {
                check_text("say", v.text);
            } else if constexpr (std::is_same_v<T, TrainerMoveCmd>) {
                check_finite("x", v.x);
                check_finite("y", v.y);
                if (std::holds_alternative<BallTarget>(v.target)) {
                    if (v.vx.has_value() != v.vy.has_value() || v.dir)
                        throw CodecError(ErrorKind::OutOfRangeField, "ball move takes vx and vy together");
                    if (v.vx) {
                        check_finite("vx", *v.vx);
                        check_finite("vy", *v.vy);
                    }
                } else {
                    const auto& p = std::get<PlayerTarget>(v.target);
                    if (p.unum < 1 || p.unum > 11) throw CodecError(ErrorKind::OutOfRangeField, "unum");
                    if (v.vx || v.vy) throw CodecError(ErrorKind::OutOfRangeField, "player move takes no velocity");
                    if (v.dir) check_angle("dir", *v.dir);
                }
            } else if constexpr (std::is_same_v<T, ChangeModeCmd>) {
                if (!v.play_mode.is_valid()) throw CodecError(ErrorKind::OutOfRangeField, "play mode");
            }
        },
        c);
}

std::string encode_client_command(const Command& c) {
    validate_command(c);
    SExpr e = std::visit(
        [](const auto& v) -> SExpr {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, InitCmd>) {
                SExpr::List l{sym("init")};
                if (!v.team.empty()) l.push_back(SExpr::atom(v.team));
                l.push_back(SExpr::list({sym("version"), SExpr::atom(std::to_string(v.version))}));
                if (v.goalie) l.push_back(SExpr::list({sym("goalie")}));
                return SExpr::list(std::move(l));
            } else if constexpr (std::is_same_v<T, MoveCmd>) {
                return SExpr::list({sym("move"), num(v.x), num(v.y)});
            } else if constexpr (std::is_same_v<T, DashCmd>) {
                return SExpr::list({sym("dash"), num(v.power), num(v.dir)});
            } else if constexpr (std::is_same_v<T, TurnCmd>) {
                return SExpr::list({sym("turn"), num(v.moment)});
            } else if constexpr (std::is_same_v<T, KickCmd>) {
                return SExpr::list({sym("kick"), num(v.power), num(v.dir)});
            } else if constexpr (std::is_same_v<T, TurnNeckCmd>) {
                return SExpr::list({sym("turn_neck"), num(v.moment)});
            } else if constexpr (std::is_same_v<T, SayCmd>) {
                return SExpr::list({sym("say"), SExpr::atom(v.text, true)});
            } else if constexpr (std::is_same_v<T, TrainerMoveCmd>) {
                SExpr::List l{sym("move")};
                if (std::holds_alternative<BallTarget>(v.target)) {
                    l.push_back(SExpr::list({sym("ball")}));
                } else {
                    const auto& p = std::get<PlayerTarget>(v.target);
                    l.push_back(SExpr::list({sym("player"), sym(std::string(1, side_char(p.side))),
                                             SExpr::atom(std::to_string(p.unum))}));
                }
                l.push_back(num(v.x));
                l.push_back(num(v.y));
                if (v.vx) {
                    l.push_back(num(*v.vx));
                    l.push_back(num(*v.vy));
                }
                if (v.dir) l.push_back(num(*v.dir));
                return SExpr::list(std::move(l));
            } else if constexpr (std::is_same_v<T, ChangeModeCmd>) {
                return SExpr::list({sym("change_mode"), sym(to_wire(v.play_mode))});
            } else if constexpr (std::is_same_v<T, RecoverCmd>) {
                return SExpr::list({sym("recover")});
            } else {
                return SExpr::list({sym("bye")});
            }
        },
        c);
    return serialize_sexpr(e);
}

std::string encode_client_commands(const std::vector<Command>& cs) {
    std::string out;
    for (const auto& c : cs) out += encode_client_command(c);
    return out;
}

Command decode_client_command(const SExpr& expr) {
    if (!expr.is_list()) throw CodecError(ErrorKind::UnknownCommandHead, "command is not a list");
    const auto& l = expr.as_list();
    const auto head = head_of(l);
    Command c;
    if (head == "init") {
        c = decode_init(l);
    } else if (head == "move") {
        c = decode_move(l);
    } else if (head == "dash") {
        if (l.size() != 2 && l.size() != 3) throw CodecError(ErrorKind::FieldCountMismatch, "dash");
        c = DashCmd{as_number(l[1], "power"), l.size() == 3 ? as_number(l[2], "dir") : 0.0};
    } else if (head == "turn") {
        expect_size(l, 2, "turn");
        c = TurnCmd{as_number(l[1], "moment")};
    } else if (head == "kick") {
        expect_size(l, 3, "kick");
        c = KickCmd{as_number(l[1], "power"), as_number(l[2], "dir")};
    } else if (head == "turn_neck") {
        expect_size(l, 2, "turn_neck");
        c = TurnNeckCmd{as_number(l[1], "moment")};
    } else if (head == "say") {
        expect_size(l, 2, "say");
        c = SayCmd{as_text(l[1], "say text")};
    } else if (head == "change_mode") {
        expect_size(l, 2, "change_mode");
        auto m = play_mode_from_wire(as_text(l[1], "play mode"));
        if (!m) throw CodecError(ErrorKind::OutOfRangeField, "play mode");
        c = ChangeModeCmd{*m};
    } else if (head == "recover") {
        expect_size(l, 1, "recover");
        c = RecoverCmd{};
    } else if (head == "bye") {
        expect_size(l, 1, "bye");
        c = ByeCmd{};
    } else {
        throw CodecError(ErrorKind::UnknownCommandHead, "'" + std::string(head) + "'");
    }
    validate_command(c);
    return c;
}

Command decode_client_command(std::string_view text) { return decode_client_command(parse_sexpr(text)); }

std::vector<Command> decode_client_commands(std::string_view text) {
    std::vector<Command> out;
    for (const auto& e : parse_sexpr_sequence(text)) out.push_back(decode_client_command(e));
    return out;
}

}  // namespace cls::codec
