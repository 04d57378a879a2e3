#pragma once

namespace lorlab {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "lorlab-report/1";
}  // namespace lorlab
