//
// Copyright 2026 The rangepir Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "rangepir/protocol/wire.hpp"

#include "rangepir/pgm/pgm_index.hpp"

namespace rangepir::protocol {
namespace {

bool KnownType(uint8_t t) {
  switch (static_cast<MessageType>(t)) {
    case MessageType::kInitReq:
    case MessageType::kInitResp:
    case MessageType::kGaloisKeys:
    case MessageType::kQueryPlain:
    case MessageType::kQueryVarpir:
    case MessageType::kRespPlain:
    case MessageType::kRespVarpir:
    case MessageType::kStaleVersion:
    case MessageType::kAdminUpdateValue:
    case MessageType::kAdminBatchUpdate:
    case MessageType::kError:
      return true;
  }
  return false;
}

void Expect(const Frame& frame, MessageType type) {
  if (frame.type == MessageType::kError && type != MessageType::kError) RaiseError(frame);
  if (frame.type != type) {
    Fail(ErrorCode::kMalformed, std::string("expected ") + ToString(type) + ", got " +
                                    ToString(frame.type));
  }
}

dldp::RangeKind ReadKind(ByteReader& r) {
  const uint8_t k = r.u8();
  if (k > 2) Fail(ErrorCode::kMalformed, "unknown range kind");
  return static_cast<dldp::RangeKind>(k);
}

void WriteEncoding(const varpir::EncodingParams& e, ByteWriter& w) {
  w.u32(e.limb_bits);
  w.u32(e.slots_per_pair);
  w.u32(e.m);
  w.u32(e.overlap);
  w.u32(e.step);
  w.u64(e.pt_count);
  w.u64(e.n);
  w.u32(e.pair_bytes);
  w.u32(e.ring_degree);
}

varpir::EncodingParams ReadEncoding(ByteReader& r) {
  varpir::EncodingParams e;
  e.limb_bits = r.u32();
  e.slots_per_pair = r.u32();
  e.m = r.u32();
  e.overlap = r.u32();
  e.step = r.u32();
  e.pt_count = r.u64();
  e.n = r.u64();
  e.pair_bytes = r.u32();
  e.ring_degree = r.u32();
  return e;
}

}  // namespace

const char* ToString(MessageType type) {
  switch (type) {
    case MessageType::kInitReq: return "INIT_REQ";
    case MessageType::kInitResp: return "INIT_RESP";
    case MessageType::kGaloisKeys: return "GALOIS_KEYS";
    case MessageType::kQueryPlain: return "QUERY_PLAIN";
    case MessageType::kQueryVarpir: return "QUERY_VARPIR";
    case MessageType::kRespPlain: return "RESP_PLAIN";
    case MessageType::kRespVarpir: return "RESP_VARPIR";
    case MessageType::kStaleVersion: return "STALE_VERSION";
    case MessageType::kAdminUpdateValue: return "ADMIN_UPDATE_VALUE";
    case MessageType::kAdminBatchUpdate: return "ADMIN_BATCH_UPDATE";
    case MessageType::kError: return "ERROR";
  }
  return "UNKNOWN";
}

Bytes EncodeFrame(const Frame& frame) {
  Require(frame.payload.size() <= Frame::kMaxPayload, ErrorCode::kInvalidArgument,
          "frame payload too large");
  ByteWriter w(frame.wire_size());
  w.u32(static_cast<uint32_t>(frame.payload.size()));
  w.u8(static_cast<uint8_t>(frame.type));
  w.raw(frame.payload);
  return std::move(w).take();
}

uint32_t ParseFrameHeader(std::span<const uint8_t, Frame::kHeaderBytes> header,
                          MessageType& type) {
  ByteReader r(header);
  const uint32_t len = r.u32();
  const uint8_t t = r.u8();
  if (!KnownType(t)) Fail(ErrorCode::kMalformed, "unknown message type " + std::to_string(t));
  if (len > Frame::kMaxPayload) Fail(ErrorCode::kMalformed, "frame payload too large");
  type = static_cast<MessageType>(t);
  return len;
}

Frame DecodeFrame(std::span<const uint8_t> bytes) {
  if (bytes.size() < Frame::kHeaderBytes) Fail(ErrorCode::kMalformed, "short frame");
  Frame f;
  const uint32_t len =
      ParseFrameHeader(bytes.first<Frame::kHeaderBytes>(), f.type);
  if (bytes.size() != Frame::kHeaderBytes + len) {
    Fail(ErrorCode::kMalformed, "frame length disagrees with header");
  }
  f.payload.assign(bytes.begin() + Frame::kHeaderBytes, bytes.end());
  return f;
}

const char* ToString(Scheme scheme) {
  return scheme == Scheme::kPlainDownload ? "plain" : "varpir";
}

Scheme ParseScheme(std::string_view name) {
  if (name == "plain") return Scheme::kPlainDownload;
  if (name == "varpir") return Scheme::kVarPir;
  Fail(ErrorCode::kInvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

void WriteHeParams(const he::HeParams& p, ByteWriter& w) {
  w.u32(static_cast<uint32_t>(p.ring_degree));
  w.u64(p.plain_modulus);
  w.u8(static_cast<uint8_t>(p.cipher_primes.size()));
  for (uint64_t q : p.cipher_primes) w.u64(q);
  w.f64(p.noise_stddev);
  w.u32(p.decomp_log);
}

he::HeParams ReadHeParams(ByteReader& r) {
  he::HeParams p;
  p.ring_degree = r.u32();
  p.plain_modulus = r.u64();
  p.cipher_primes.resize(r.u8());
  for (uint64_t& q : p.cipher_primes) q = r.u64();
  p.noise_stddev = r.f64();
  p.decomp_log = r.u32();
  try {
    p.validate();
  } catch (const Error& e) {
    Fail(ErrorCode::kMalformed, std::string("bad HE parameters: ") + e.what());
  }
  return p;
}

Frame EncodeInitBundle(const InitBundle& b) {
  ByteWriter w;
  w.u64(b.n);
  w.u32(b.kv_bits);
  w.u64(b.version_id);
  w.u8(static_cast<uint8_t>(b.schemes.size()));
  for (Scheme s : b.schemes) w.u8(static_cast<uint8_t>(s));
  WriteHeParams(b.he, w);
  WriteEncoding(b.encoding, w);
  w.blob(b.pgm_blob);
  w.f64(b.c_fhe_per_plaintext);
  w.f64(b.bandwidth_hint);
  w.f64(b.rtt_hint);
  return {MessageType::kInitResp, std::move(w).take()};
}

InitBundle DecodeInitBundle(const Frame& frame) {
  Expect(frame, MessageType::kInitResp);
  ByteReader r(frame.payload);
  InitBundle b;
  b.n = r.u64();
  b.kv_bits = r.u32();
  b.version_id = r.u64();
  b.schemes.resize(r.u8());
  for (Scheme& s : b.schemes) {
    const uint8_t v = r.u8();
    if (v > 1) Fail(ErrorCode::kMalformed, "unknown scheme tag");
    s = static_cast<Scheme>(v);
  }
  b.he = ReadHeParams(r);
  b.encoding = ReadEncoding(r);
  const auto blob = r.blob();
  b.pgm_blob.assign(blob.begin(), blob.end());
  b.c_fhe_per_plaintext = r.f64();
  b.bandwidth_hint = r.f64();
  b.rtt_hint = r.f64();
  r.expect_done("INIT_RESP");

  if (b.n == 0 || b.kv_bits % 8 != 0 || b.kv_bits < 128) {
    Fail(ErrorCode::kMalformed, "bad store shape in bundle");
  }
  const pgm::PgmIndex index = pgm::PgmIndex::Deserialize(b.pgm_blob);
  if (index.n() != b.n) Fail(ErrorCode::kMalformed, "PGM index built for another store size");
  if (b.encoding != varpir::EncodingParams::Derive(b.he, b.pair_bytes(), b.n, b.encoding.overlap)) {
    Fail(ErrorCode::kMalformed, "encoding parameters inconsistent with the store");
  }
  return b;
}

Frame EncodePlainQuery(const PlainQuery& q) {
  ByteWriter w(25);
  w.u64(q.version_id);
  w.u8(static_cast<uint8_t>(q.kind));
  w.u64(q.l);
  w.u64(q.r);
  return {MessageType::kQueryPlain, std::move(w).take()};
}

PlainQuery DecodePlainQuery(const Frame& frame) {
  Expect(frame, MessageType::kQueryPlain);
  ByteReader r(frame.payload);
  PlainQuery q;
  q.version_id = r.u64();
  q.kind = ReadKind(r);
  q.l = r.u64();
  q.r = r.u64();
  r.expect_done("QUERY_PLAIN");
  return q;
}

dldp::RangeKind PtRangeKind(const varpir::PtRange& range, uint64_t pt_count) {
  if (range.w_pt == pt_count) return dldp::RangeKind::kFull;
  return range.l_pt <= range.r_pt ? dldp::RangeKind::kContiguous : dldp::RangeKind::kWrapped;
}

varpir::PtRange PtRangeFromWire(dldp::RangeKind kind, uint64_t l_pt, uint64_t r_pt,
                                uint64_t pt_count) {
  if (l_pt >= pt_count || r_pt >= pt_count) Fail(ErrorCode::kMalformed, "plaintext id out of range");
  switch (kind) {
    case dldp::RangeKind::kFull:
      if (l_pt != 0 || r_pt != pt_count - 1) break;
      return {0, pt_count - 1, pt_count};
    case dldp::RangeKind::kContiguous:
      if (l_pt > r_pt) break;
      return {l_pt, r_pt, r_pt - l_pt + 1};
    case dldp::RangeKind::kWrapped:
      if (r_pt + 1 >= l_pt) break;
      return {l_pt, r_pt, pt_count - l_pt + r_pt + 1};
  }
  Fail(ErrorCode::kMalformed, "inconsistent plaintext run");
}

Frame EncodeVarPirQuery(const he::HeContext& ctx, const varpir::VarPirQuery& q,
                        uint64_t pt_count) {
  Require(q.cts.size() <= 0xFFFF, ErrorCode::kInvalidArgument, "too many query ciphertexts");
  ByteWriter w(27 + q.cts.size() * (4 + ctx.ciphertext_bytes()));
  w.u64(q.version_id);
  w.u8(static_cast<uint8_t>(PtRangeKind(q.range, pt_count)));
  w.u64(q.range.l_pt);
  w.u64(q.range.r_pt);
  w.u16(static_cast<uint16_t>(q.cts.size()));
  for (const auto& ct : q.cts) {
    w.u32(static_cast<uint32_t>(ctx.ciphertext_bytes()));
    he::AppendCiphertext(ctx, ct, w);
  }
  return {MessageType::kQueryVarpir, std::move(w).take()};
}

VarPirWireQuery DecodeVarPirQuery(const Frame& frame) {
  Expect(frame, MessageType::kQueryVarpir);
  ByteReader r(frame.payload);
  VarPirWireQuery q;
  q.version_id = r.u64();
  q.kind = ReadKind(r);
  q.l_pt = r.u64();
  q.r_pt = r.u64();
  q.cts.resize(r.u16());
  for (Bytes& ct : q.cts) {
    const auto blob = r.blob();
    ct.assign(blob.begin(), blob.end());
  }
  r.expect_done("QUERY_VARPIR");
  return q;
}

Frame EncodeStale(const StaleNotice& n) {
  ByteWriter w;
  w.u64(n.new_version);
  w.blob(n.pgm_blob);
  w.raw(EncodeFrame(n.inner));
  return {MessageType::kStaleVersion, std::move(w).take()};
}

StaleNotice DecodeStale(const Frame& frame) {
  Expect(frame, MessageType::kStaleVersion);
  ByteReader r(frame.payload);
  StaleNotice n;
  n.new_version = r.u64();
  const auto blob = r.blob();
  n.pgm_blob.assign(blob.begin(), blob.end());
  n.inner = DecodeFrame(r.raw(r.remaining()));
  if (n.inner.type == MessageType::kStaleVersion) Fail(ErrorCode::kMalformed, "nested stale notice");
  return n;
}

Frame EncodeError(ErrorCode code, const std::string& message) {
  ByteWriter w;
  w.u16(static_cast<uint16_t>(code));
  w.blob(std::span(reinterpret_cast<const uint8_t*>(message.data()), message.size()));
  return {MessageType::kError, std::move(w).take()};
}

void RaiseError(const Frame& frame) {
  if (frame.type != MessageType::kError) Fail(ErrorCode::kInternal, "not an error frame");
  ByteReader r(frame.payload);
  const uint16_t code = r.u16();
  const auto text = r.blob();
  ErrorCode ec = static_cast<ErrorCode>(code);
  if (code < 1 || code > static_cast<uint16_t>(ErrorCode::kInternal)) ec = ErrorCode::kInternal;
  // The code's name is already part of the message.
  std::string message(text.begin(), text.end());
  const std::string prefix = std::string(rangepir::ToString(ec)) + ": ";
  if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
  throw Error(ec, "server: " + message);
}

Frame EncodeValueUpdate(const ValueUpdate& u) {
  ByteWriter w;
  w.u64(u.key);
  w.blob(u.value);
  return {MessageType::kAdminUpdateValue, std::move(w).take()};
}

ValueUpdate DecodeValueUpdate(const Frame& frame) {
  Expect(frame, MessageType::kAdminUpdateValue);
  ByteReader r(frame.payload);
  ValueUpdate u;
  u.key = r.u64();
  const auto v = r.blob();
  u.value.assign(v.begin(), v.end());
  r.expect_done("ADMIN_UPDATE_VALUE");
  return u;
}

Frame EncodeBatchUpdate(const BatchUpdate& u) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(u.inserts.size()));
  for (const auto& ins : u.inserts) {
    w.u64(ins.key);
    w.blob(ins.value);
  }
  w.u32(static_cast<uint32_t>(u.deletes.size()));
  for (uint64_t k : u.deletes) w.u64(k);
  return {MessageType::kAdminBatchUpdate, std::move(w).take()};
}

BatchUpdate DecodeBatchUpdate(const Frame& frame) {
  Expect(frame, MessageType::kAdminBatchUpdate);
  ByteReader r(frame.payload);
  BatchUpdate u;
  const uint32_t inserts = r.u32();
  if (inserts > r.remaining() / 12) Fail(ErrorCode::kMalformed, "insert count exceeds payload");
  u.inserts.resize(inserts);
  for (auto& ins : u.inserts) {
    ins.key = r.u64();
    const auto v = r.blob();
    ins.value.assign(v.begin(), v.end());
  }
  const uint32_t deletes = r.u32();
  if (deletes > r.remaining() / 8) Fail(ErrorCode::kMalformed, "delete count exceeds payload");
  u.deletes.resize(deletes);
  for (uint64_t& k : u.deletes) k = r.u64();
  r.expect_done("ADMIN_BATCH_UPDATE");
  return u;
}

Frame EncodeAdminAck(MessageType type, uint64_t version_id) {
  ByteWriter w(8);
  w.u64(version_id);
  return {type, std::move(w).take()};
}

uint64_t DecodeAdminAck(const Frame& frame, MessageType expected) {
  Expect(frame, expected);
  ByteReader r(frame.payload);
  const uint64_t v = r.u64();
  r.expect_done("admin acknowledgement");
  return v;
}

}  // namespace rangepir::protocol
