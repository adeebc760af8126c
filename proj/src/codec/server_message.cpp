#include "cls/codec/server_message.hpp"

#include <algorithm>

#include "cls/common/landmarks.hpp"
#include "detail.hpp"

namespace cls::codec {

using namespace detail;

namespace {

int decode_cycle(const SExpr& e) {
    const int c = as_int(e, "cycle");
    if (c < 0) throw CodecError(ErrorKind::OutOfRangeField, "cycle " + std::to_string(c));
    return c;
}

Side decode_side(const SExpr& e, std::string_view what) {
    auto s = side_from_char(as_text(e, what));
    if (!s) throw CodecError(ErrorKind::OutOfRangeField, std::string(what) + ": not a side");
    return *s;
}

PlayMode decode_play_mode(const SExpr& e) {
    auto m = play_mode_from_wire(as_text(e, "play mode"));
    if (!m) throw CodecError(ErrorKind::OutOfRangeField, "unknown play mode '" + as_text(e, "play mode") + "'");
    return *m;
}

ObjectKind decode_object_name(const SExpr& e) {
    const auto& name = as_list(e, "object name");
    const auto head = head_of(name);
    if (head == "b") {
        expect_size(name, 1, "ball name");
        return BallObject{};
    }
    if (head == "p") {
        if (name.size() > 4) throw CodecError(ErrorKind::FieldCountMismatch, "player name");
        PlayerObject p;
        if (name.size() >= 2) p.team = as_text(name[1], "team name");
        if (name.size() >= 3) {
            p.unum = as_int(name[2], "uniform number");
            if (*p.unum < 1 || *p.unum > 11) throw CodecError(ErrorKind::OutOfRangeField, "uniform number");
        }
        if (name.size() == 4 && !(name[3].is_atom() && name[3].as_atom().text == "goalie"))
            throw CodecError(ErrorKind::FieldCountMismatch, "player name");
        return p;
    }
    if (head == "g") {
        expect_size(name, 2, "goal name");
        return GoalObject{decode_side(name[1], "goal side")};
    }
    if (head == "l") {
        expect_size(name, 2, "line name");
        const auto& id = as_text(name[1], "line id");
        if (id != "l" && id != "r" && id != "t" && id != "b")
            throw CodecError(ErrorKind::UnknownObject, "line '" + id + "'");
        return LineObject{id[0]};
    }
    if (head == "f") {
        std::string key;
        for (const auto& part : name) {
            if (!part.is_atom() || part.as_atom().quoted)
                throw CodecError(ErrorKind::UnknownObject, "malformed flag name");
            if (!key.empty()) key += ' ';
            key += part.as_atom().text;
        }
        if (!landmark_position(key))
            throw CodecError(ErrorKind::UnknownObject, "flag '" + key + "'");
        return FlagObject{key};
    }
    throw CodecError(ErrorKind::UnknownObject, "object head '" + std::string(head) + "'");
}

SeeMsg decode_see(const SExpr::List& l) {
    if (l.size() < 2) throw CodecError(ErrorKind::FieldCountMismatch, "see");
    SeeMsg m;
    m.cycle = decode_cycle(l[1]);
    m.objects.reserve(l.size() - 2);
    for (std::size_t i = 2; i < l.size(); ++i) {
        const auto& obj = as_list(l[i], "observed object");
        if (obj.size() != 3 && obj.size() != 5)
            throw CodecError(ErrorKind::FieldCountMismatch, "observed object has " + std::to_string(obj.size()) +
                                                                " fields");
        ObservedObject o;
        o.kind = decode_object_name(obj[0]);
        o.distance = as_number(obj[1], "distance");
        o.direction = as_number(obj[2], "direction");
        if (o.distance < 0.0) throw CodecError(ErrorKind::OutOfRangeField, "negative distance");
        if (o.direction < -180.0 || o.direction >= 180.0)
            throw CodecError(ErrorKind::OutOfRangeField, "direction outside [-180, 180)");
        if (obj.size() == 5) {
            o.dist_change = as_number(obj[3], "distance change");
            o.dir_change = as_number(obj[4], "direction change");
        }
        m.objects.push_back(std::move(o));
    }
    return m;
}

SenseBodyMsg decode_sense_body(const SExpr::List& l) {
    if (l.size() < 2) throw CodecError(ErrorKind::FieldCountMismatch, "sense_body");
    SenseBodyMsg m;
    m.cycle = decode_cycle(l[1]);
    bool have_stamina = false, have_speed = false, have_head = false;
    for (std::size_t i = 2; i < l.size(); ++i) {
        const auto& item = as_list(l[i], "sense_body item");
        const auto head = head_of(item);
        if (head == "stamina") {
            if (item.size() < 3) throw CodecError(ErrorKind::FieldCountMismatch, "stamina");
            m.stamina = as_number(item[1], "stamina");
            m.effort = as_number(item[2], "effort");
            have_stamina = true;
        } else if (head == "speed") {
            expect_size(item, 3, "speed");
            m.speed_mag = as_number(item[1], "speed magnitude");
            m.speed_dir = as_number(item[2], "speed direction");
            have_speed = true;
        } else if (head == "head_angle") {
            expect_size(item, 2, "head_angle");
            m.neck_dir = as_number(item[1], "head angle");
            have_head = true;
        } else if (head.empty()) {
            throw CodecError(ErrorKind::FieldCountMismatch, "sense_body item without a name");
        }
        // Other sensor items (view_mode, counters, ...) are accepted and ignored.
    }
    if (!have_stamina || !have_speed || !have_head)
        throw CodecError(ErrorKind::FieldCountMismatch, "sense_body is missing stamina, speed or head_angle");
    return m;
}

FullStateMsg decode_fullstate(const SExpr::List& l) {
    if (l.size() < 2) throw CodecError(ErrorKind::FieldCountMismatch, "fullstate");
    FullStateMsg m;
    auto& w = m.world;
    w.cycle = decode_cycle(l[1]);
    bool have_mode = false, have_score = false, have_teams = false, have_ball = false;
    for (std::size_t i = 2; i < l.size(); ++i) {
        const auto& item = as_list(l[i], "fullstate item");
        if (item.empty()) throw CodecError(ErrorKind::FieldCountMismatch, "empty fullstate item");
        if (item.front().is_list()) {
            const auto& name = item.front().as_list();
            const auto head = head_of(name);
            if (head == "b") {
                expect_size(name, 1, "ball name");
                expect_size(item, 5, "ball state");
                w.ball.pos = {as_number(item[1], "ball x"), as_number(item[2], "ball y")};
                w.ball.vel = {as_number(item[3], "ball vx"), as_number(item[4], "ball vy")};
                have_ball = true;
            } else if (head == "p") {
                expect_size(name, 3, "player name");
                expect_size(item, 10, "player state");
                PlayerState p;
                p.side = decode_side(name[1], "player side");
                p.unum = as_int(name[2], "uniform number");
                if (p.unum < 1 || p.unum > 11) throw CodecError(ErrorKind::OutOfRangeField, "uniform number");
                p.pos = {as_number(item[1], "x"), as_number(item[2], "y")};
                p.vel = {as_number(item[3], "vx"), as_number(item[4], "vy")};
                p.body_dir = as_number(item[5], "body");
                p.neck_dir = as_number(item[6], "neck");
                p.stamina = as_number(item[7], "stamina");
                p.effort = as_number(item[8], "effort");
                // item[9] is reserved for the player type id
                (void)as_int(item[9], "player type");
                w.players.push_back(p);
            } else {
                throw CodecError(ErrorKind::UnknownObject, "fullstate object");
            }
            continue;
        }
        const auto head = head_of(item);
        if (head == "pmode") {
            expect_size(item, 2, "pmode");
            w.play_mode = decode_play_mode(item[1]);
            have_mode = true;
        } else if (head == "score") {
            expect_size(item, 3, "score");
            w.score_left = as_int(item[1], "left score");
            w.score_right = as_int(item[2], "right score");
            if (w.score_left < 0 || w.score_right < 0) throw CodecError(ErrorKind::OutOfRangeField, "score");
            have_score = true;
        } else if (head == "teams") {
            expect_size(item, 3, "teams");
            w.team_left = as_text(item[1], "left team");
            w.team_right = as_text(item[2], "right team");
            have_teams = true;
        } else {
            throw CodecError(ErrorKind::FieldCountMismatch, "unknown fullstate item '" + std::string(head) + "'");
        }
    }
    if (!have_mode || !have_score || !have_teams || !have_ball)
        throw CodecError(ErrorKind::FieldCountMismatch, "fullstate is missing pmode, score, teams or ball");
    std::sort(w.players.begin(), w.players.end(), [](const PlayerState& a, const PlayerState& b) {
        return std::pair(a.side, a.unum) < std::pair(b.side, b.unum);
    });
    return m;
}

ParamMap decode_params(const SExpr::List& l, std::size_t first, std::string_view what) {
    ParamMap out;
    for (std::size_t i = first; i < l.size(); ++i) {
        const auto& kv = as_list(l[i], what);
        expect_size(kv, 2, what);
        const auto key = head_of(kv);
        if (key.empty()) throw CodecError(ErrorKind::FieldCountMismatch, std::string(what) + ": missing key");
        out[std::string(key)] = as_number(kv[1], key);
    }
    return out;
}

std::string join_rest(const SExpr::List& l, std::size_t first) {
    std::string out;
    for (std::size_t i = first; i < l.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += l[i].is_atom() ? l[i].as_atom().text : serialize_sexpr(l[i]);
    }
    return out;
}

// ---- encoding ---------------------------------------------------------------

SExpr text_atom(const std::string& s) { return SExpr::atom(s, true); }
SExpr sym(std::string_view s) { return SExpr::atom(std::string(s)); }
SExpr n2(double v) { return SExpr::atom(format_2dp(v)); }
SExpr nx(double v) { return SExpr::atom(format_exact(v)); }
SExpr ni(long long v) { return SExpr::atom(std::to_string(v)); }

SExpr encode_object_name(const ObjectKind& k) {
    return std::visit(
        [](const auto& o) -> SExpr {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, FlagObject>) {
                SExpr::List parts;
                std::string_view id = o.id;
                while (!id.empty()) {
                    auto sp = id.find(' ');
                    parts.push_back(sym(id.substr(0, sp)));
                    if (sp == std::string_view::npos) break;
                    id.remove_prefix(sp + 1);
                }
                return SExpr::list(std::move(parts));
            } else if constexpr (std::is_same_v<T, BallObject>) {
                return SExpr::list({sym("b")});
            } else if constexpr (std::is_same_v<T, PlayerObject>) {
                SExpr::List parts{sym("p")};
                if (o.team) {
                    parts.push_back(text_atom(*o.team));
                    if (o.unum) parts.push_back(ni(*o.unum));
                }
                return SExpr::list(std::move(parts));
            } else if constexpr (std::is_same_v<T, GoalObject>) {
                return SExpr::list({sym("g"), sym(std::string(1, side_char(o.side)))});
            } else {
                return SExpr::list({sym("l"), sym(std::string(1, o.id))});
            }
        },
        k);
}

SExpr encode_params(std::string_view head, const ParamMap& params, std::optional<int> id = std::nullopt) {
    SExpr::List l{sym(head)};
    if (id) l.push_back(SExpr::list({sym("id"), ni(*id)}));
    for (const auto& [k, v] : params) l.push_back(SExpr::list({sym(k), nx(v)}));
    return SExpr::list(std::move(l));
}

}  // namespace

std::optional<int> message_cycle(const ServerMessage& m) {
    return std::visit(
        [](const auto& v) -> std::optional<int> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SeeMsg> || std::is_same_v<T, SenseBodyMsg> ||
                          std::is_same_v<T, HearMsg>) {
                return v.cycle;
            } else if constexpr (std::is_same_v<T, FullStateMsg>) {
                return v.world.cycle;
            } else {
                return std::nullopt;
            }
        },
        m);
}

ServerMessage decode_server_message(const SExpr& expr) {
    if (!expr.is_list()) throw CodecError(ErrorKind::UnknownMessageHead, "message is not a list");
    const auto& l = expr.as_list();
    const auto head = head_of(l);
    if (head == "init") {
        expect_size(l, 4, "init");
        InitMsg m;
        m.side = decode_side(l[1], "init side");
        m.unum = as_int(l[2], "init unum");
        if (m.unum < 0 || m.unum > 11) throw CodecError(ErrorKind::OutOfRangeField, "init unum");
        m.play_mode = decode_play_mode(l[3]);
        return m;
    }
    if (head == "see") return decode_see(l);
    if (head == "sense_body") return decode_sense_body(l);
    if (head == "fullstate") return decode_fullstate(l);
    if (head == "hear") {
        expect_size(l, 4, "hear");
        return HearMsg{decode_cycle(l[1]), as_text(l[2], "hear sender"), as_text(l[3], "hear text")};
    }
    if (head == "server_param") return ServerParamMsg{decode_params(l, 1, "server_param")};
    if (head == "player_param") return PlayerParamMsg{decode_params(l, 1, "player_param")};
    if (head == "player_type") {
        if (l.size() < 2) throw CodecError(ErrorKind::FieldCountMismatch, "player_type");
        const auto& id = as_list(l[1], "player_type id");
        expect_size(id, 2, "player_type id");
        if (head_of(id) != "id") throw CodecError(ErrorKind::FieldCountMismatch, "player_type must start with id");
        PlayerTypeMsg m;
        m.id = as_int(id[1], "player type id");
        if (m.id < 0) throw CodecError(ErrorKind::OutOfRangeField, "player type id");
        m.params = decode_params(l, 2, "player_type");
        return m;
    }
    if (head == "error") return ErrorMsg{join_rest(l, 1)};
    if (head == "ok") return OkMsg{join_rest(l, 1)};
    throw CodecError(ErrorKind::UnknownMessageHead, "'" + std::string(head) + "'");
}

ServerMessage decode_server_message(std::string_view text) { return decode_server_message(parse_sexpr(text)); }

std::string encode_server_message(const ServerMessage& msg) {
    SExpr e = std::visit(
        [](const auto& m) -> SExpr {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, InitMsg>) {
                return SExpr::list({sym("init"), sym(std::string(1, side_char(m.side))), ni(m.unum),
                                    sym(to_wire(m.play_mode))});
            } else if constexpr (std::is_same_v<T, SeeMsg>) {
                SExpr::List l{sym("see"), ni(m.cycle)};
                for (const auto& o : m.objects) {
                    SExpr::List item{encode_object_name(o.kind), n2(o.distance), n2(o.direction)};
                    if (o.dist_change && o.dir_change) {
                        item.push_back(n2(*o.dist_change));
                        item.push_back(n2(*o.dir_change));
                    }
                    l.push_back(SExpr::list(std::move(item)));
                }
                return SExpr::list(std::move(l));
            } else if constexpr (std::is_same_v<T, SenseBodyMsg>) {
                return SExpr::list({sym("sense_body"), ni(m.cycle),
                                    SExpr::list({sym("stamina"), n2(m.stamina), n2(m.effort)}),
                                    SExpr::list({sym("speed"), n2(m.speed_mag), n2(m.speed_dir)}),
                                    SExpr::list({sym("head_angle"), n2(m.neck_dir)})});
            } else if constexpr (std::is_same_v<T, FullStateMsg>) {
                const auto& w = m.world;
                SExpr::List l{sym("fullstate"), ni(w.cycle), SExpr::list({sym("pmode"), sym(to_wire(w.play_mode))}),
                              SExpr::list({sym("score"), ni(w.score_left), ni(w.score_right)}),
                              SExpr::list({sym("teams"), text_atom(w.team_left), text_atom(w.team_right)}),
                              SExpr::list({SExpr::list({sym("b")}), nx(w.ball.pos.x), nx(w.ball.pos.y),
                                           nx(w.ball.vel.x), nx(w.ball.vel.y)})};
                for (const auto& p : w.players) {
                    l.push_back(SExpr::list({SExpr::list({sym("p"), sym(std::string(1, side_char(p.side))),
                                                          ni(p.unum)}),
                                             nx(p.pos.x), nx(p.pos.y), nx(p.vel.x), nx(p.vel.y), nx(p.body_dir),
                                             nx(p.neck_dir), nx(p.stamina), nx(p.effort), ni(0)}));
                }
                return SExpr::list(std::move(l));
            } else if constexpr (std::is_same_v<T, HearMsg>) {
                return SExpr::list({sym("hear"), ni(m.cycle), SExpr::atom(m.sender), text_atom(m.text)});
            } else if constexpr (std::is_same_v<T, ServerParamMsg>) {
                return encode_params("server_param", m.params);
            } else if constexpr (std::is_same_v<T, PlayerParamMsg>) {
                return encode_params("player_param", m.params);
            } else if constexpr (std::is_same_v<T, PlayerTypeMsg>) {
                return encode_params("player_type", m.params, m.id);
            } else if constexpr (std::is_same_v<T, ErrorMsg>) {
                return SExpr::list({sym("error"), SExpr::atom(m.text)});
            } else {
                return SExpr::list({sym("ok"), SExpr::atom(m.text)});
            }
        },
        msg);
    return serialize_sexpr(e);
}

}  // namespace cls::codec
