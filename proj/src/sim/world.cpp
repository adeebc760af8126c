#include "cls/sim/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cls/common/landmarks.hpp"

namespace cls::sim {

PlayerState* SimWorld::find(Side side, int unum) {
    for (auto& p : players)
        if (p.side == side && p.unum == unum) return &p;
    return nullptr;
}

const PlayerState* SimWorld::find(Side side, int unum) const {
    return const_cast<SimWorld*>(this)->find(side, unum);
}

PlayerState& SimWorld::add_player(Side side, int unum, const SimConfig& cfg) {
    if (find(side, unum)) throw std::logic_error("player slot already taken");
    PlayerState p;
    p.side = side;
    p.unum = unum;
    p.pos = to_global(side, home_position(unum));
    p.body_dir = to_global_dir(side, 0.0);
    p.stamina = cfg.stamina_max;
    p.effort = cfg.effort_max;
    auto it = std::lower_bound(players.begin(), players.end(), p, [](const PlayerState& a, const PlayerState& b) {
        return std::pair(a.side, a.unum) < std::pair(b.side, b.unum);
    });
    return *players.insert(it, p);
}

WorldSnapshot SimWorld::snapshot() const {
    WorldSnapshot s;
    s.cycle = cycle;
    s.play_mode = play_mode;
    s.score_left = score_left;
    s.score_right = score_right;
    s.team_left = team_left;
    s.team_right = team_right;
    s.ball = ball;
    s.players = players;
    return s;
}

SimWorld make_world(const SimConfig& cfg) {
    SimWorld w;
    w.rng_seed = cfg.seed;
    return w;
}

Vec2 home_position(int unum) {
    static constexpr std::array<Vec2, 11> kHome = {{
        {-50, 0},
        {-35, -20}, {-35, -7}, {-35, 7}, {-35, 20},
        {-20, -15}, {-20, 0}, {-20, 15},
        {-5, -20}, {-5, 0}, {-5, 20},
    }};
    if (unum < 1 || unum > 11) throw std::out_of_range("unum");
    return kHome[static_cast<std::size_t>(unum - 1)];
}

Vec2 to_global(Side side, Vec2 own) { return side == Side::Left ? own : -own; }

double to_global_dir(Side side, double own_dir) {
    return side == Side::Left ? normalize_angle(own_dir) : normalize_angle(own_dir + 180.0);
}

std::string_view event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Goal: return "goal";
        case EventKind::ModeChange: return "mode";
        case EventKind::IllegalCommandForPlayMode: return "illegal_for_mode";
        case EventKind::MultipleBodyCommands: return "multiple_body";
    }
    return "?";
}

double discretize_dash_dir(double dir) { return normalize_angle(45.0 * std::round(normalize_angle(dir) / 45.0)); }

double kick_effective_power(double power, Vec2 ball_rel_body, const SimConfig& cfg) {
    const double dir_diff = std::abs(ball_rel_body.angle_deg());
    const double dist = ball_rel_body.length();
    const double eff = 1.0 - 0.25 * dir_diff / 180.0 - 0.25 * dist / cfg.kickable_area();
    return power * cfg.kick_power_rate * eff;
}

namespace {

int role_rank(AgentRole r) {
    switch (r) {
        case AgentRole::Trainer: return 0;
        case AgentRole::Player: return 1;
        case AgentRole::Coach: return 2;
    }
    return 3;
}

auto agent_key(const AgentId& a) { return std::tuple(role_rank(a.role), a.side, a.unum); }

bool ball_frozen(const PlayMode& m) {
    return m.kind != PlayModeKind::PlayOn;
}

void clamp_speed(Vec2& v, double max) {
    const double s = v.length();
    if (s > max) v *= max / s;
}

void clamp_to_pitch(Vec2& p, const SimConfig& cfg) {
    const double xm = cfg.half_length() + pitch::kFlagMargin;
    const double ym = cfg.half_width() + pitch::kFlagMargin;
    p.x = std::clamp(p.x, -xm, xm);
    p.y = std::clamp(p.y, -ym, ym);
}

struct Step {
    SimWorld& w;
    const SimConfig& cfg;
    StepReport& report;
    Vec2 ball_accel;
    std::map<std::pair<Side, int>, Vec2> player_accel;

    void reject(EventKind k, const AgentId& a, const codec::Command& c) {
        report.events.push_back({k, a, std::string(codec::command_name(c))});
    }

    void change_mode(PlayMode m) {
        if (m == w.play_mode) return;
        w.set_mode(m);
        report.events.push_back({EventKind::ModeChange, {}, to_wire(m)});
    }

    void trainer(const AgentId&, const codec::Command& c) {
        if (const auto* mv = std::get_if<codec::TrainerMoveCmd>(&c)) {
            if (std::holds_alternative<codec::BallTarget>(mv->target)) {
                w.ball.pos = {mv->x, mv->y};
                w.ball.vel = {mv->vx.value_or(0.0), mv->vy.value_or(0.0)};
                clamp_speed(w.ball.vel, cfg.ball_speed_max);
            } else {
                const auto& t = std::get<codec::PlayerTarget>(mv->target);
                if (auto* p = w.find(t.side, t.unum)) {
                    p->pos = {mv->x, mv->y};
                    p->vel = {};
                    if (mv->dir) p->body_dir = normalize_angle(*mv->dir);
                }
            }
        } else if (const auto* cm = std::get_if<codec::ChangeModeCmd>(&c)) {
            change_mode(cm->play_mode);
        } else if (std::holds_alternative<codec::RecoverCmd>(c)) {
            for (auto& p : w.players) {
                p.stamina = cfg.stamina_max;
                p.effort = cfg.effort_max;
            }
        }
    }

    bool legal_for_mode(const AgentId& a, const codec::Command& c) const {
        const auto k = w.play_mode.kind;
        if (k == PlayModeKind::TimeOver) return false;
        if (std::holds_alternative<codec::MoveCmd>(c)) return k == PlayModeKind::BeforeKickOff || k == PlayModeKind::Goal;
        if (std::holds_alternative<codec::KickCmd>(c)) {
            if (k == PlayModeKind::PlayOn) return true;
            if (k == PlayModeKind::BeforeKickOff || k == PlayModeKind::Goal) return false;
            return w.play_mode.side == a.side;
        }
        return true;
    }

    void player(const AgentId& a, const codec::Command& c) {
        PlayerState* p = w.find(a.side, a.unum);
        if (!p) return;
        std::visit(
            [&](const auto& cmd) {
                using T = std::decay_t<decltype(cmd)>;
                if constexpr (std::is_same_v<T, codec::MoveCmd>) {
                    p->pos = to_global(p->side, {cmd.x, cmd.y});
                    clamp_to_pitch(p->pos, cfg);
                    p->vel = {};
                } else if constexpr (std::is_same_v<T, codec::DashCmd>) {
                    double power = cmd.power;
                    if (power > 0.0) power = std::min(power, p->stamina);
                    p->stamina -= std::max(0.0, power);
                    const double dir = p->body_dir + discretize_dash_dir(cmd.dir);
                    player_accel[{p->side, p->unum}] += polar(power * cfg.dash_power_rate * p->effort, dir);
                } else if constexpr (std::is_same_v<T, codec::TurnCmd>) {
                    p->body_dir = normalize_angle(p->body_dir + cmd.moment / (1.0 + cfg.inertia_moment * p->vel.length()));
                } else if constexpr (std::is_same_v<T, codec::KickCmd>) {
                    const Vec2 rel = (w.ball.pos - p->pos).rotated_deg(-p->body_dir);
                    if (rel.length() > cfg.kickable_area()) return;
                    const double mag = kick_effective_power(cmd.power, rel, cfg);
                    ball_accel += polar(mag, p->body_dir + cmd.dir);
                    w.last_touch = p->side;
                    if (w.play_mode.kind != PlayModeKind::PlayOn) change_mode(PlayMode::play_on());
                } else if constexpr (std::is_same_v<T, codec::TurnNeckCmd>) {
                    p->neck_dir = std::clamp(p->neck_dir + cmd.moment, -cfg.max_neck_angle, cfg.max_neck_angle);
                } else if constexpr (std::is_same_v<T, codec::SayCmd>) {
                    report.said.emplace_back(a, cmd.text);
                }
            },
            c);
    }

    void motion() {
        if (ball_frozen(w.play_mode)) {
            w.ball.vel = {};
        } else {
            w.ball.vel += ball_accel;
            clamp_speed(w.ball.vel, cfg.ball_speed_max);
            w.ball.pos += w.ball.vel;
            w.ball.vel *= cfg.ball_decay;
            clamp_to_pitch(w.ball.pos, cfg);
        }
        for (auto& p : w.players) {
            if (auto it = player_accel.find({p.side, p.unum}); it != player_accel.end()) p.vel += it->second;
            clamp_speed(p.vel, cfg.player_speed_max);
            p.pos += p.vel;
            p.vel *= cfg.player_decay;
            clamp_to_pitch(p.pos, cfg);
            p.stamina = std::clamp(p.stamina + cfg.stamina_recovery, 0.0, cfg.stamina_max);
        }
    }
};

}  // namespace

StepReport step_simulation(SimWorld& world, const std::vector<AgentCommand>& commands, const SimConfig& cfg) {
    StepReport report;
    Step s{world, cfg, report, {}, {}};

    std::vector<const AgentCommand*> order;
    order.reserve(commands.size());
    for (const auto& c : commands) order.push_back(&c);
    std::stable_sort(order.begin(), order.end(),
                     [](const AgentCommand* a, const AgentCommand* b) { return agent_key(a->agent) < agent_key(b->agent); });

    std::optional<AgentId> current;
    bool body_used = false;
    bool neck_used = false;
    for (const AgentCommand* ac : order) {
        const AgentId& a = ac->agent;
        const codec::Command& c = ac->command;
        if (!current || !(*current == a)) {
            current = a;
            body_used = false;
            neck_used = false;
        }
        if (std::holds_alternative<codec::InitCmd>(c) || std::holds_alternative<codec::ByeCmd>(c)) continue;
        if (a.role == AgentRole::Trainer) {
            s.trainer(a, c);
            continue;
        }
        if (a.role == AgentRole::Coach) {
            if (const auto* say = std::get_if<codec::SayCmd>(&c)) {
                report.said.emplace_back(a, say->text);
            } else {
                s.reject(EventKind::IllegalCommandForPlayMode, a, c);
            }
            continue;
        }
        const bool trainer_only = std::holds_alternative<codec::TrainerMoveCmd>(c) ||
                                  std::holds_alternative<codec::ChangeModeCmd>(c) ||
                                  std::holds_alternative<codec::RecoverCmd>(c);
        if (trainer_only || !s.legal_for_mode(a, c)) {
            s.reject(EventKind::IllegalCommandForPlayMode, a, c);
            // An illegal body command still occupies the slot.
            if (codec::is_body_command(c)) body_used = true;
            continue;
        }
        if (codec::is_body_command(c)) {
            if (body_used) {
                s.reject(EventKind::MultipleBodyCommands, a, c);
                continue;
            }
            body_used = true;
            report.body_applied.push_back(a);
        } else if (std::holds_alternative<codec::TurnNeckCmd>(c)) {
            if (neck_used) {
                s.reject(EventKind::MultipleBodyCommands, a, c);
                continue;
            }
            neck_used = true;
        }
        s.player(a, c);
    }

    s.motion();
    ++world.cycle;
    return report;
}

// ---- referee ---------------------------------------------------------------

void referee_judge(SimWorld& w, const SimConfig& cfg, std::vector<Event>& events) {
    auto change = [&](PlayMode m) {
        if (m == w.play_mode) return;
        w.set_mode(m);
        events.push_back({EventKind::ModeChange, {}, to_wire(m)});
    };
    auto centre_ball = [&] {
        w.ball = {};
        w.last_touch.reset();
    };

    if (w.play_mode.kind == PlayModeKind::TimeOver) return;
    if (w.cycle >= cfg.total_cycles()) {
        w.ball.vel = {};
        change(PlayMode::time_over());
        return;
    }
    if (w.cycle == cfg.half_cycles) {
        centre_ball();
        change(PlayMode::of(PlayModeKind::KickOff, Side::Right));
        return;
    }

    const int elapsed = w.cycle - w.mode_since;
    switch (w.play_mode.kind) {
        case PlayModeKind::BeforeKickOff:
            if (elapsed >= cfg.before_kickoff_cycles) change(PlayMode::of(PlayModeKind::KickOff, Side::Left));
            return;
        case PlayModeKind::Goal:
            if (elapsed >= cfg.goal_pause_cycles) change(PlayMode::of(PlayModeKind::KickOff, opposite(*w.play_mode.side)));
            return;
        case PlayModeKind::KickOff:
        case PlayModeKind::KickIn:
        case PlayModeKind::GoalKick:
        case PlayModeKind::CornerKick:
            if (elapsed >= cfg.dead_ball_timeout) change(PlayMode::play_on());
            return;
        case PlayModeKind::PlayOn:
        case PlayModeKind::TimeOver:
            break;
    }

    const double hl = cfg.half_length();
    const double hw = cfg.half_width();
    const Vec2 b = w.ball.pos;
    const double sx = b.x > 0 ? 1.0 : -1.0;
    const double sy = b.y > 0 ? 1.0 : -1.0;

    if (std::abs(b.x) > hl + cfg.ball_size) {
        if (std::abs(b.y) < cfg.goal_width / 2.0) {
            const Side scorer = b.x > 0 ? Side::Left : Side::Right;
            (scorer == Side::Left ? w.score_left : w.score_right) += 1;
            events.push_back({EventKind::Goal, {AgentRole::Player, scorer, 0},
                              std::to_string(scorer == Side::Left ? w.score_left : w.score_right)});
            centre_ball();
            change(PlayMode::of(PlayModeKind::Goal, scorer));
            return;
        }
        const Side defending = b.x > 0 ? Side::Right : Side::Left;
        if (w.last_touch == defending) {
            w.ball = {{sx * hl, sy * hw}, {}};
            change(PlayMode::of(PlayModeKind::CornerKick, opposite(defending)));
        } else {
            w.ball = {{sx * (hl - pitch::kGoalAreaLength), sy * pitch::kGoalAreaHalfWidth}, {}};
            change(PlayMode::of(PlayModeKind::GoalKick, defending));
        }
        return;
    }
    if (std::abs(b.y) > hw + cfg.ball_size) {
        const Side taker = w.last_touch ? opposite(*w.last_touch) : (b.x < 0 ? Side::Left : Side::Right);
        w.ball = {{std::clamp(b.x, -hl, hl), sy * hw}, {}};
        change(PlayMode::of(PlayModeKind::KickIn, taker));
    }
}

}  // namespace cls::sim
