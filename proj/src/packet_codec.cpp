#include "leoroute/packet_codec.hpp"

#include <limits>
#include <string>

namespace leoroute {

int PacketHeader::planned_hops() const
{
    int total = 0;
    for (const auto& s : segments) {
        if (const auto* is = std::get_if<HeaderInterSat>(&s))
            total += is->rem_h + is->rem_v;
        else
            total += 2;
    }
    return total;
}

std::size_t encoded_size(const PacketHeader& h)
{
    std::size_t n = kHeaderFixedBytes;
    for (const auto& s : h.segments)
        n += std::holds_alternative<HeaderInterSat>(s) ? kInterSatBytes : kCoopBytes;
    return n;
}

namespace {

enum : std::uint8_t { kTypeInterSat = 0, kTypeCoop = 1 };

void put16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    put16(out, static_cast<std::uint16_t>(v >> 16));
    put16(out, static_cast<std::uint16_t>(v));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : m_bytes(b) {}

    std::uint8_t u8()
    {
        need(1);
        return m_bytes[m_pos++];
    }
    std::uint16_t u16()
    {
        need(2);
        const auto v = static_cast<std::uint16_t>((m_bytes[m_pos] << 8) | m_bytes[m_pos + 1]);
        m_pos += 2;
        return v;
    }
    std::uint32_t u32()
    {
        const std::uint32_t hi = u16();
        return (hi << 16) | u16();
    }
    std::size_t remaining() const { return m_bytes.size() - m_pos; }

private:
    void need(std::size_t n) const
    {
        if (m_pos + n > m_bytes.size())
            throw DecodeError("truncated header at byte " + std::to_string(m_pos));
    }

    std::span<const std::uint8_t> m_bytes;
    std::size_t m_pos = 0;
};

std::uint16_t narrow16(int v, const char* what)
{
    if (v < 0 || v > std::numeric_limits<std::uint16_t>::max())
        throw ContractViolation(std::string(what) + " does not fit in 16 bits");
    return static_cast<std::uint16_t>(v);
}

} // namespace

std::vector<std::uint8_t> encode(const PacketHeader& h)
{
    if (h.segments.size() > 255)
        throw ContractViolation("a header holds at most 255 segments");
    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(h));
    put16(out, h.src);
    put16(out, h.dst);
    put32(out, h.flow);
    put32(out, h.tick);
    out.push_back(static_cast<std::uint8_t>(h.segments.size()));
    for (const auto& s : h.segments) {
        if (const auto* is = std::get_if<HeaderInterSat>(&s)) {
            out.push_back(kTypeInterSat);
            put16(out, is->end_node);
            out.push_back(static_cast<std::uint8_t>(is->direction));
            put16(out, is->rem_h);
            put16(out, is->rem_v);
        } else {
            const auto& co = std::get<HeaderCoop>(s);
            out.push_back(kTypeCoop);
            put16(out, co.relay);
            put16(out, co.up_gateway);
        }
    }
    return out;
}

PacketHeader decode(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    PacketHeader h;
    h.src = r.u16();
    h.dst = r.u16();
    h.flow = r.u32();
    h.tick = r.u32();
    const int count = r.u8();
    h.segments.reserve(count);
    for (int i = 0; i < count; ++i) {
        if (r.remaining() == 0)
            throw DecodeError("segment count " + std::to_string(count) + " exceeds the " +
                              std::to_string(i) + " segments present");
        const std::uint8_t type = r.u8();
        if (type == kTypeInterSat) {
            HeaderInterSat is;
            is.end_node = r.u16();
            const std::uint8_t dir = r.u8();
            if (dir > 3)
                throw DecodeError("invalid direction code " + std::to_string(dir));
            is.direction = static_cast<Direction>(dir);
            is.rem_h = r.u16();
            is.rem_v = r.u16();
            h.segments.emplace_back(is);
        } else if (type == kTypeCoop) {
            HeaderCoop co;
            co.relay = r.u16();
            co.up_gateway = r.u16();
            h.segments.emplace_back(co);
        } else {
            throw DecodeError("unknown segment type " + std::to_string(type));
        }
    }
    if (r.remaining() != 0)
        throw DecodeError("segment count " + std::to_string(count) + " leaves " +
                          std::to_string(r.remaining()) + " trailing bytes");
    return h;
}

bool well_formed(const PacketHeader& h)
{
    if (h.segments.size() > 255)
        return false;
    for (const auto& s : h.segments) {
        if (const auto* is = std::get_if<HeaderInterSat>(&s)) {
            if (is->complete() || is->end_node == 0 || static_cast<int>(is->direction) > 3)
                return false;
        } else {
            const auto& co = std::get<HeaderCoop>(s);
            if (co.up_gateway == 0)
                return false;
        }
    }
    try {
        return decode(encode(h)) == h;
    } catch (const std::exception&) {
        return false;
    }
}

namespace {

std::vector<HeaderSegment> to_header_segments(const RoutePlan& plan)
{
    std::vector<HeaderSegment> out;
    out.reserve(plan.segments.size());
    for (const auto& s : plan.segments) {
        if (const auto* is = std::get_if<InterSatSegment>(&s))
            out.emplace_back(HeaderInterSat{narrow16(is->to.value, "segment end node"), is->direction,
                                            narrow16(is->h_h, "h_h"), narrow16(is->h_v, "h_v")});
        else {
            const auto& co = std::get<CoopSegment>(s);
            out.emplace_back(HeaderCoop{narrow16(co.relay_id, "relay id"),
                                        narrow16(co.gateway_up.value, "up gateway")});
        }
    }
    return out;
}

} // namespace

PacketHeader header_from_plan(const RoutePlan& plan, SatelliteId src, SatelliteId dst,
                              std::uint32_t flow, std::uint32_t tick)
{
    PacketHeader h;
    h.src = narrow16(src.value, "source id");
    h.dst = narrow16(dst.value, "destination id");
    h.flow = flow;
    h.tick = tick;
    h.segments = to_header_segments(plan);
    return h;
}

PacketHeader& apply_forward(PacketHeader& h, Axis axis)
{
    if (h.segments.empty() || !std::holds_alternative<HeaderInterSat>(h.segments.front()))
        throw ContractViolation("apply_forward: active segment is not inter-satellite");
    auto& is = std::get<HeaderInterSat>(h.segments.front());
    auto& rem = axis == Axis::Horizontal ? is.rem_h : is.rem_v;
    if (rem == 0)
        throw ContractViolation("apply_forward: no hops left in that direction");
    --rem;
    if (is.complete())
        h.segments.erase(h.segments.begin());
    return h;
}

PacketHeader& apply_case(PacketHeader& h, UpdateCase c, const CaseContext& ctx)
{
    auto front_is = [&]() -> HeaderInterSat* {
        return h.segments.empty() ? nullptr : std::get_if<HeaderInterSat>(&h.segments.front());
    };
    auto front_co = [&]() -> HeaderCoop* {
        return h.segments.empty() ? nullptr : std::get_if<HeaderCoop>(&h.segments.front());
    };

    switch (c) {
    case UpdateCase::ForwardToRelay: {
        // The segment that led here is finished; the cooperative one becomes active.
        if (auto* is = front_is(); is && is->complete() && is->end_node == ctx.current.value)
            h.segments.erase(h.segments.begin());
        const auto* co = front_co();
        if (!co || co->relay != ctx.relay_id)
            throw ContractViolation("case 1: no cooperative segment for relay " +
                                    std::to_string(ctx.relay_id));
        return h;
    }
    case UpdateCase::DivertGateway: {
        if (auto* is = front_is(); is && is->complete())
            h.segments.erase(h.segments.begin());
        const auto* co = front_co();
        if (!co || co->relay != ctx.relay_id)
            throw ContractViolation("case 2: diversion without a cooperative segment for relay " +
                                    std::to_string(ctx.relay_id));
        if (ctx.alternate == ctx.current || ctx.to_alternate.h_min == 0)
            throw ContractViolation("case 2: alternate gateway equals the current node");
        h.segments.insert(h.segments.begin(),
                          HeaderInterSat{narrow16(ctx.alternate.value, "alternate gateway"),
                                         ctx.to_alternate.direction,
                                         narrow16(ctx.to_alternate.h_h, "h_h"),
                                         narrow16(ctx.to_alternate.h_v, "h_v")});
        return h;
    }
    case UpdateCase::Replan:
    case UpdateCase::RelayReroute:
        if (!ctx.plan)
            throw ContractViolation("cases 3 and 5 need a fresh plan");
        h.segments = to_header_segments(*ctx.plan);
        return h;
    case UpdateCase::ArriveUpGateway: {
        const auto* co = front_co();
        if (!co || co->up_gateway != ctx.current.value)
            throw ContractViolation("case 4: node " + std::to_string(ctx.current.value) +
                                    " is not the active up-gateway");
        h.segments.erase(h.segments.begin());
        return h;
    }
    }
    throw ContractViolation("unknown update case");
}

} // namespace leoroute
