public void routeAPacketTo(IPAddress ip, int ttl, List<Host> usedHosts) throws Exception {
    usedHosts.add(this);
    if (ttl == 0) {//Problem in routing
        throw new Exception("Routing problem...");
    }
    if (!hasIP(ip)) { //Packet not arrived
        Host nextHost = null;
        List<Host> directlyAccessibleHosts = getDirectlyAccessibleHosts();
        for (Host directlyAccessibleHost: directlyAccessibleHosts) {
            if (...) // If the packet is for a neighbour, we send it to him
                nextHost = directlyAccessibleHost;
        }
        if (nextHost != null) {
            nextHost.routeAPacketTo(ip, ttl - 1, usedHosts);
        } else {//We have to look in the routing table
            List<Host> directlyAccessible = getDirectlyAccessibleHosts();
            IPAddress nextIP = this.getRoutingTable().getNextHop(ip);
            boolean nextHostFound = false;
            for (Host aDirectlyAccessible: directlyAccessible) {
                if (...) { //Search the nextHop host object
                    aDirectlyAccessible.routeAPacketTo(ip, ttl - 1, usedHosts);
                    nextHostFound = true;
                }
            }
            if (!nextHostFound) { //Routing problem
                throw new Exception("Routing problem...");
            }
        }
    }
}
