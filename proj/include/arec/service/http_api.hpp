#pragma once

#include <httplib.h>

#include "arec/service/registry_service.hpp"

namespace arec::service {

/// Registers every JSON endpoint on `server`. Sessions travel as
/// `Authorization: Bearer <token>`; errors are {"error": code, "message": text}.
void mount_api(httplib::Server& server, RegistryService& service);

}  // namespace arec::service
