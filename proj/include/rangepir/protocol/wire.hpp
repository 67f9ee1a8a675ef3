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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rangepir/common/bytes.hpp"
#include "rangepir/dldp/dldp.hpp"
#include "rangepir/he/params.hpp"
#include "rangepir/store/versioned_store.hpp"
#include "rangepir/varpir/varpir.hpp"

namespace rangepir::protocol {

enum class MessageType : uint8_t {
  kInitReq = 0x01,
  kInitResp = 0x02,
  kGaloisKeys = 0x03,
  kQueryPlain = 0x10,
  kQueryVarpir = 0x11,
  kRespPlain = 0x20,
  kRespVarpir = 0x21,
  kStaleVersion = 0x22,
  kAdminUpdateValue = 0x30,
  kAdminBatchUpdate = 0x31,
  kError = 0x7F,
};

const char* ToString(MessageType type);

// On the wire: u32 LE payload length, u8 type, payload.
struct Frame {
  MessageType type = MessageType::kError;
  Bytes payload;

  size_t wire_size() const { return kHeaderBytes + payload.size(); }
  static constexpr size_t kHeaderBytes = 5;
  static constexpr uint32_t kMaxPayload = 1u << 30;
};

Bytes EncodeFrame(const Frame& frame);
// Decodes exactly one frame occupying all of bytes.
Frame DecodeFrame(std::span<const uint8_t> bytes);
// Validates a header and returns the payload length.
uint32_t ParseFrameHeader(std::span<const uint8_t, Frame::kHeaderBytes> header, MessageType& type);

enum class Scheme : uint8_t { kPlainDownload = 0, kVarPir = 1 };
const char* ToString(Scheme scheme);
Scheme ParseScheme(std::string_view name);

struct InitBundle {
  uint64_t n = 0;
  uint32_t kv_bits = 0;
  uint64_t version_id = 0;
  std::vector<Scheme> schemes;
  he::HeParams he;
  varpir::EncodingParams encoding;
  Bytes pgm_blob;
  double c_fhe_per_plaintext = 0.0;
  double bandwidth_hint = 0.0;
  double rtt_hint = 0.0;

  uint32_t pair_bytes() const { return kv_bits / 8; }
};

Frame EncodeInitBundle(const InitBundle& bundle);
// Throws kMalformed when the PGM blob does not deserialize or disagrees
// with n, or the encoding parameters do not follow from the rest.
InitBundle DecodeInitBundle(const Frame& frame);

struct PlainQuery {
  uint64_t version_id = 0;
  dldp::RangeKind kind = dldp::RangeKind::kFull;
  uint64_t l = 0;
  uint64_t r = 0;
};
Frame EncodePlainQuery(const PlainQuery& q);
PlainQuery DecodePlainQuery(const Frame& frame);

// Kind, l_pt and r_pt describe the cyclic plaintext run; w_pt follows from
// them and pt_count.
struct VarPirWireQuery {
  uint64_t version_id = 0;
  dldp::RangeKind kind = dldp::RangeKind::kFull;
  uint64_t l_pt = 0;
  uint64_t r_pt = 0;
  std::vector<Bytes> cts;
};
Frame EncodeVarPirQuery(const he::HeContext& ctx, const varpir::VarPirQuery& q,
                        uint64_t pt_count);
VarPirWireQuery DecodeVarPirQuery(const Frame& frame);
dldp::RangeKind PtRangeKind(const varpir::PtRange& range, uint64_t pt_count);
// Rebuilds the run; throws kMalformed when the fields are inconsistent.
varpir::PtRange PtRangeFromWire(dldp::RangeKind kind, uint64_t l_pt, uint64_t r_pt,
                                uint64_t pt_count);

struct StaleNotice {
  uint64_t new_version = 0;
  Bytes pgm_blob;
  Frame inner;
};
Frame EncodeStale(const StaleNotice& notice);
StaleNotice DecodeStale(const Frame& frame);

Frame EncodeError(ErrorCode code, const std::string& message);
// Throws the carried error.
[[noreturn]] void RaiseError(const Frame& frame);

struct ValueUpdate {
  uint64_t key = 0;
  Bytes value;
};
Frame EncodeValueUpdate(const ValueUpdate& u);
ValueUpdate DecodeValueUpdate(const Frame& frame);

struct BatchUpdate {
  std::vector<store::InsertPair> inserts;
  std::vector<uint64_t> deletes;
};
Frame EncodeBatchUpdate(const BatchUpdate& u);
BatchUpdate DecodeBatchUpdate(const Frame& frame);

// Admin acknowledgement: same type as the request, payload = version u64.
Frame EncodeAdminAck(MessageType type, uint64_t version_id);
uint64_t DecodeAdminAck(const Frame& frame, MessageType expected);

void WriteHeParams(const he::HeParams& p, ByteWriter& w);
he::HeParams ReadHeParams(ByteReader& r);

}  // namespace rangepir::protocol
