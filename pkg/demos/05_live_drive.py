"""
A live server and an autonomous operator over real UDP sockets
==============================================================

Starts the datagram server on loopback, then lets the route-following
client drive the robot to a goal 1.2 m away.  Everything here crosses
actual sockets: commands up, telemetry and media frames down, control
reports every five seconds.  The client's jitter estimate therefore
measures real event-loop scheduling noise, not a simulated channel.
"""

import asyncio

from rtpteleop.robot import WallMap
from rtpteleop.live import LiveConfig, LiveServer, drive_route


async def main():
    # Port 0 lets the OS pick free ports; the server reports them back.
    config = LiveConfig(
        command_port=0, telemetry_port=0, media_port=0, gateway_port=None,
        wall_map=WallMap(walls=[], start=(0.0, 0.0, 0.0),
                         goal=(1200.0, 0.0)))
    server = LiveServer(config)
    await server.start()
    print("server up, ports:", server.ports)

    try:
        report = await drive_route(
            [(0.0, 0.0), (1200.0, 0.0)],
            host="127.0.0.1", command_port=server.ports["command"],
            duration=60.0, cruise=300.0)
    finally:
        await server.stop()

    print("goal reached:", report.reached)
    print("commands sent:", report.commands_sent)
    print("telemetry received:", report.telemetry_packets)
    print("client jitter estimate: %.3f ms" % report.jitter_ms)
    pose = report.final_pose
    print("final pose: x=%.0f mm y=%.0f mm" % (pose.x, pose.y))
    print("robot velocity after hangup: v=%.0f w=%.0f"
          % (server.runtime.server.pose.v, server.runtime.server.pose.w))


asyncio.run(main())
